"""Client for the out-of-process denoiser bridge.

Wire protocol (little-endian, over the child's stdin/stdout):

* Request:  magic ``RSMD`` (4), u8 version = 1, u32 rows, u32 cols,
  f64 variance, rows*cols float64 payload.
* Response: magic ``RSMD`` (4), u8 status (0 ok / 1 error), u32 rows,
  u32 cols, then payload (ok) or u32 message-length + UTF-8 message.

One response per request; the server must tolerate repeated requests on
one connection and shut down cleanly on end-of-input.
"""

from __future__ import annotations

import os
import select
import shlex
import struct
import subprocess
import time

import numpy as np

MAGIC = b"RSMD"
PROTOCOL_VERSION = 1
REQUEST_HEADER = struct.Struct("<4sBIId")
RESPONSE_HEADER = struct.Struct("<4sBII")


class BridgeError(RuntimeError):
    """Protocol or process failure talking to a denoiser server."""


def encode_request(image, variance, version=PROTOCOL_VERSION) -> bytes:
    image = np.ascontiguousarray(image, dtype=np.float64)
    rows, cols = image.shape
    return REQUEST_HEADER.pack(MAGIC, version, rows, cols, float(variance)) \
        + image.astype("<f8").tobytes()


def encode_response(image) -> bytes:
    image = np.ascontiguousarray(image, dtype=np.float64)
    rows, cols = image.shape
    return RESPONSE_HEADER.pack(MAGIC, 0, rows, cols) + image.astype("<f8").tobytes()


def encode_error_response(message: str) -> bytes:
    msg = message.encode("utf-8")
    return RESPONSE_HEADER.pack(MAGIC, 1, 0, 0) + struct.pack("<I", len(msg)) + msg


class BridgeClient:
    """Owns one denoiser server child process, reused across requests."""

    def __init__(self, command, timeout=60.0):
        if isinstance(command, str):
            command = shlex.split(command)
        self.command = list(command)
        self.timeout = timeout
        self._proc = None

    def _ensure_started(self):
        if self._proc is not None and self._proc.poll() is None:
            return
        try:
            self._proc = subprocess.Popen(
                self.command, stdin=subprocess.PIPE, stdout=subprocess.PIPE)
        except OSError as e:
            raise BridgeError(f"cannot spawn denoiser server {self.command}: {e}") from e

    def _read_exact(self, nbytes, what):
        deadline = time.monotonic() + self.timeout
        fd = self._proc.stdout.fileno()
        os.set_blocking(fd, False)
        chunks = b""
        while len(chunks) < nbytes:
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                raise BridgeError(
                    f"timeout after {self.timeout}s reading {what} "
                    f"({len(chunks)}/{nbytes} bytes)")
            ready, _, _ = select.select([fd], [], [], remaining)
            if not ready:
                continue
            chunk = os.read(fd, nbytes - len(chunks))
            if not chunk:
                raise BridgeError(
                    f"server closed the stream while reading {what} "
                    f"({len(chunks)}/{nbytes} bytes)")
            chunks += chunk
        return chunks

    def denoise(self, image, variance):
        """One request/response round-trip; returns the denoised image."""
        image = np.ascontiguousarray(image, dtype=np.float64)
        self._ensure_started()
        try:
            self._proc.stdin.write(encode_request(image, variance))
            self._proc.stdin.flush()
        except BrokenPipeError as e:
            raise BridgeError("server closed stdin (process died?)") from e

        header = self._read_exact(RESPONSE_HEADER.size, "response header")
        magic, status, rows, cols = RESPONSE_HEADER.unpack(header)
        if magic != MAGIC:
            raise BridgeError(f"bad response magic {magic!r}")
        if status == 1:
            (msg_len,) = struct.unpack("<I", self._read_exact(4, "message length"))
            msg = self._read_exact(msg_len, "error message").decode("utf-8", "replace")
            if "version" in msg.lower():
                raise BridgeError(f"protocol version mismatch: {msg}")
            raise BridgeError(f"server error: {msg}")
        if status != 0:
            raise BridgeError(f"unknown response status {status}")
        if (rows, cols) != image.shape:
            raise BridgeError(
                f"response dims {rows}x{cols} do not match request "
                f"{image.shape[0]}x{image.shape[1]}")
        payload = self._read_exact(8 * rows * cols, "payload")
        out = np.frombuffer(payload, dtype="<f8").reshape(rows, cols).copy()
        if not np.all(np.isfinite(out)):
            raise BridgeError("server returned non-finite payload values")
        return out

    def close(self):
        if self._proc is None:
            return
        try:
            if self._proc.stdin:
                self._proc.stdin.close()
            self._proc.wait(timeout=10)
        except Exception:
            self._proc.kill()
        finally:
            self._proc = None

    def __enter__(self):
        self._ensure_started()
        return self

    def __exit__(self, *exc):
        self.close()
