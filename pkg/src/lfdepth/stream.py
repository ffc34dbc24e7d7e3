"""Depth frame streaming over TCP.

Little-endian wire format per frame: magic "LFDS", version byte, u64
frame_id, u64 timestamp_us, u16 width, u16 height, payload kind byte
(0 disparity float32, 1 depth-meters float32, 2 gray u8), u32 payload
length, then row-major top-to-bottom samples (float32 little-endian, NaN
for invalid pixels).

The server pushes every produced frame to all connected clients and never
blocks on a slow one: each client has a bounded frame queue and is
disconnected when it falls behind.
"""
import queue
import socket
import struct
import threading
from dataclasses import dataclass

import numpy as np

FRAME_MAGIC = b"LFDS"
FRAME_VERSION = 1

KIND_DISPARITY = 0
KIND_DEPTH = 1
KIND_GRAY = 2

_HEADER = struct.Struct("<4sBQQHHBI")
_SAMPLE_DTYPE = {
    KIND_DISPARITY: np.dtype("<f4"),
    KIND_DEPTH: np.dtype("<f4"),
    KIND_GRAY: np.dtype(np.uint8),
}


class ProtocolError(RuntimeError):
    """Unrecoverable framing error (bad magic, version or length)."""


class NeedMoreData(Exception):
    """The buffer ends before the frame does; feed more bytes and retry."""


@dataclass(frozen=True)
class FrameMessage:
    frame_id: int
    timestamp_us: int
    kind: int
    payload: np.ndarray  # (height, width)

    @property
    def width(self):
        return self.payload.shape[1]

    @property
    def height(self):
        return self.payload.shape[0]


def encode_frame(data, frame_id=0, timestamp_us=0, kind=KIND_DEPTH):
    """Serialize one map into the wire format."""
    if kind not in _SAMPLE_DTYPE:
        raise ValueError(f"unknown payload kind {kind}")
    data = np.asarray(data)
    if data.ndim != 2:
        raise ValueError(f"frames are 2-D maps, got shape {data.shape}")
    h, w = data.shape
    if w > 0xFFFF or h > 0xFFFF:
        raise ValueError(f"frame {w}x{h} exceeds the 16-bit dimension fields")
    payload = np.ascontiguousarray(data, dtype=_SAMPLE_DTYPE[kind]).tobytes()
    header = _HEADER.pack(FRAME_MAGIC, FRAME_VERSION, frame_id, timestamp_us,
                          w, h, kind, len(payload))
    return header + payload


def decode_frame(buf, offset=0):
    """Parse one frame from buf at offset; returns (FrameMessage, next_offset).

    Raises NeedMoreData when buf ends mid-frame and ProtocolError on a
    corrupt header. Never keeps buffer exports alive, so callers may grow a
    bytearray between retries.
    """
    avail = len(buf) - offset
    if avail < _HEADER.size:
        raise NeedMoreData(f"have {avail} bytes of a {_HEADER.size} byte header")
    magic, version, frame_id, ts, w, h, kind, plen = _HEADER.unpack_from(buf, offset)
    if magic != FRAME_MAGIC:
        raise ProtocolError(f"bad frame magic {bytes(magic)!r}")
    if version != FRAME_VERSION:
        raise ProtocolError(f"unsupported frame version {version}")
    if kind not in _SAMPLE_DTYPE:
        raise ProtocolError(f"unknown payload kind {kind}")
    dtype = _SAMPLE_DTYPE[kind]
    if plen != w * h * dtype.itemsize:
        raise ProtocolError(f"payload length {plen} != {w}x{h}x{dtype.itemsize}")
    if avail < _HEADER.size + plen:
        raise NeedMoreData(f"frame needs {_HEADER.size + plen} bytes, have {avail}")
    payload = np.frombuffer(buf, dtype=dtype, count=w * h,
                            offset=offset + _HEADER.size).reshape(h, w).copy()
    if dtype.kind == "f":
        payload = payload.astype(np.float32)
    msg = FrameMessage(frame_id=frame_id, timestamp_us=ts, kind=kind, payload=payload)
    return msg, offset + _HEADER.size + plen


class DepthStreamServer:
    """Fan-out TCP frame pusher.

    publish() enqueues a frame for every connected client and returns
    immediately; clients whose queue is full (default 8 frames behind) are
    dropped. With no clients, frames are discarded.
    """

    def __init__(self, host="127.0.0.1", port=0, client_buffer=8):
        self._sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        self._sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        self._sock.bind((host, port))
        self._sock.listen(8)
        self._client_buffer = client_buffer
        self._clients = []
        self._lock = threading.Lock()
        self._closing = threading.Event()
        self._accept_thread = threading.Thread(target=self._accept_loop, daemon=True)
        self._accept_thread.start()

    @property
    def address(self):
        return self._sock.getsockname()

    def _accept_loop(self):
        while not self._closing.is_set():
            try:
                conn, _ = self._sock.accept()
            except OSError:
                return
            conn.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
            q = queue.Queue(maxsize=self._client_buffer)
            thread = threading.Thread(target=self._client_loop, args=(conn, q), daemon=True)
            with self._lock:
                self._clients.append((conn, q))
            thread.start()

    def _client_loop(self, conn, q):
        try:
            while True:
                blob = q.get()
                if blob is None:
                    break
                conn.sendall(blob)
        except OSError:
            pass
        finally:
            self._drop(conn)
            try:
                conn.shutdown(socket.SHUT_RDWR)
            except OSError:
                pass
            conn.close()

    def _drop(self, conn):
        with self._lock:
            self._clients = [(c, q) for c, q in self._clients if c is not conn]

    def publish(self, data, frame_id=0, timestamp_us=0, kind=KIND_DEPTH):
        """Send one frame to every connected client; slow clients are dropped."""
        blob = encode_frame(data, frame_id=frame_id, timestamp_us=timestamp_us, kind=kind)
        with self._lock:
            clients = list(self._clients)
        for conn, q in clients:
            try:
                q.put_nowait(blob)
            except queue.Full:
                # sentinel jumps the queue: closing beats stalling the producer
                self._drop(conn)
                try:
                    conn.shutdown(socket.SHUT_RDWR)
                except OSError:
                    pass

    def client_count(self):
        with self._lock:
            return len(self._clients)

    def flush_and_close(self, timeout=5.0):
        """Let connected clients drain their queues, then shut down."""
        self._closing.set()
        with self._lock:
            clients = list(self._clients)
        for _, q in clients:
            try:
                q.put(None, timeout=timeout)
            except queue.Full:
                pass
        deadline = threading.Event()
        for conn, q in clients:
            waited = 0.0
            while not q.empty() and waited < timeout:
                deadline.wait(0.01)
                waited += 0.01
        self._sock.close()

    close = flush_and_close


def serve(address, frames, client_buffer=8, kind=KIND_DEPTH):
    """Push an iterable of (frame_id, timestamp_us, map) until exhausted."""
    host, port = address
    server = DepthStreamServer(host=host, port=port, client_buffer=client_buffer)
    try:
        for frame_id, timestamp_us, data in frames:
            server.publish(data, frame_id=frame_id, timestamp_us=timestamp_us, kind=kind)
    finally:
        server.flush_and_close()
    return server.address


def receive_frames(host, port, limit=None, timeout=30.0):
    """Connect and yield FrameMessages until the server closes the stream."""
    with socket.create_connection((host, port), timeout=timeout) as conn:
        conn.settimeout(timeout)
        buf = bytearray()
        received = 0
        while limit is None or received < limit:
            try:
                msg, consumed = decode_frame(buf)
            except NeedMoreData:
                chunk = conn.recv(1 << 16)
                if not chunk:
                    if buf:
                        raise ProtocolError(f"stream ended mid-frame ({len(buf)} stray bytes)")
                    return
                buf.extend(chunk)
                continue
            del buf[:consumed]
            received += 1
            yield msg
