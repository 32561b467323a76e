"""Reference echo server for the denoiser bridge protocol.

Returns every request payload unchanged.  Used as the protocol fixture
in tests and as a stand-in `--denoiser-cmd` target; run with
``python -m rsmrecon.echo_server`` or the ``rsm-echo-server`` script.
"""

from __future__ import annotations

import struct
import sys

from .bridge import MAGIC, PROTOCOL_VERSION, REQUEST_HEADER, RESPONSE_HEADER


def read_exact(stream, nbytes):
    chunks = b""
    while len(chunks) < nbytes:
        chunk = stream.read(nbytes - len(chunks))
        if not chunk:
            return None if not chunks else chunks
        chunks += chunk
    return chunks


def serve(stdin, stdout):
    """Request loop; returns on end-of-input."""
    while True:
        header = read_exact(stdin, REQUEST_HEADER.size)
        if header is None:
            return 0
        if len(header) < REQUEST_HEADER.size:
            sys.stderr.write("echo server: truncated request header\n")
            return 1
        magic, version, rows, cols, _variance = REQUEST_HEADER.unpack(header)
        if magic != MAGIC:
            _error(stdout, f"bad request magic {magic!r}")
            return 1
        payload = read_exact(stdin, 8 * rows * cols)
        if payload is None or len(payload) < 8 * rows * cols:
            sys.stderr.write("echo server: truncated payload\n")
            return 1
        if version != PROTOCOL_VERSION:
            _error(stdout, f"unsupported protocol version {version}, expected "
                           f"{PROTOCOL_VERSION}")
            continue
        stdout.write(RESPONSE_HEADER.pack(MAGIC, 0, rows, cols))
        stdout.write(payload)
        stdout.flush()


def _error(stdout, message):
    msg = message.encode("utf-8")
    stdout.write(RESPONSE_HEADER.pack(MAGIC, 1, 0, 0))
    stdout.write(struct.pack("<I", len(msg)))
    stdout.write(msg)
    stdout.flush()


def main():
    return serve(sys.stdin.buffer, sys.stdout.buffer)


if __name__ == "__main__":
    sys.exit(main())
