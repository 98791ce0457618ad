"""TCP device emulator: speaks the binary wire protocol and answers scan
requests by streaming simulated scan lines from a configured scene.

One thread per connection; each connection runs at most one scan at a
time. Lines go out in sector order at a configurable rate that mimics the
mechanical rotation (default 20 lines/s, 0 means unthrottled for tests).
"""

import select
import socketserver
import threading
import time

from .. import protocol
from ..acoustics import SamplingPlan
from ..scanmodel import Gain, ScanConfig
from ..simulator import POOL_CONDITIONS, PoolScene, simulate_sweep
from ..acoustics import sound_speed

__all__ = ["EmulatorServer", "serve_emulator", "DEFAULT_LINES_PER_SECOND"]

DEFAULT_LINES_PER_SECOND = 20.0

ERR_BAD_REQUEST = 1
ERR_SCAN_ACTIVE = 2

FIRMWARE = (1, 0)


def config_from_request(req: protocol.ScanRequest,
                        conditions=POOL_CONDITIONS) -> ScanConfig:
    """Resolve a wire request into a scan configuration. The sample period
    arrives quantized in hardware ticks; sound speed comes from the
    emulator's water conditions."""
    c = sound_speed(conditions)
    plan = SamplingPlan.from_period(
        c, protocol.ticks_to_period(req.sample_period_ticks),
        req.sample_count)
    return ScanConfig(plan=plan, gain=Gain(req.gain),
                      sector_start_grad=req.sector_start_grad,
                      sector_end_grad=req.sector_end_grad,
                      angular_step_grad=req.angular_step_grad)


class _Handler(socketserver.BaseRequestHandler):
    def handle(self) -> None:
        decoder = protocol.StreamDecoder()
        pending: list = []
        sock = self.request
        while True:
            if pending:
                item = pending.pop(0)
            else:
                data = sock.recv(4096)
                if not data:
                    return
                items = decoder.feed(data)
                if not items:
                    continue
                pending = items
                continue
            self._dispatch(sock, decoder, item, pending)

    def _dispatch(self, sock, decoder, item, pending) -> None:
        if isinstance(item, protocol.ScanRequest):
            self._run_scan(sock, decoder, item, pending)
        elif isinstance(item, protocol.DeviceInfo):
            sock.sendall(protocol.encode(protocol.DeviceInfo(*FIRMWARE)))
        elif isinstance(item, protocol.DecodeEvent):
            sock.sendall(protocol.encode(
                protocol.ErrorReply(ERR_BAD_REQUEST, item.reason)))
        else:
            sock.sendall(protocol.encode(protocol.ErrorReply(
                ERR_BAD_REQUEST, f"unexpected {type(item).__name__}")))

    def _run_scan(self, sock, decoder, req: protocol.ScanRequest,
                  pending: list) -> None:
        server: EmulatorServer = self.server
        try:
            config = config_from_request(req, server.conditions)
            sweep, _ = simulate_sweep(server.scene, config)
        except (ValueError, protocol.EncodeError) as exc:
            sock.sendall(protocol.encode(
                protocol.ErrorReply(ERR_BAD_REQUEST, str(exc))))
            return
        interval = (1.0 / server.lines_per_second
                    if server.lines_per_second > 0 else 0.0)
        next_due = time.monotonic()
        for line in sweep.lines:
            if interval:
                delay = next_due - time.monotonic()
                if delay > 0:
                    time.sleep(delay)
                next_due += interval
            # A second request arriving mid-scan violates the one-scan
            # session invariant; answer it without dropping any line.
            self._drain_incoming(sock, decoder, pending)
            sock.sendall(protocol.encode(protocol.ScanLineData(
                angle_grad=line.angle_grad, gain=req.gain,
                intensities=line.intensities.tobytes())))

    def _drain_incoming(self, sock, decoder, pending: list) -> None:
        readable, _, _ = select.select([sock], [], [], 0)
        if readable:
            data = sock.recv(4096)
            if data:
                pending.extend(decoder.feed(data))
        overlapping = [i for i in pending
                       if isinstance(i, protocol.ScanRequest)]
        if overlapping:
            pending[:] = [i for i in pending
                          if not isinstance(i, protocol.ScanRequest)]
            for _ in overlapping:
                sock.sendall(protocol.encode(protocol.ErrorReply(
                    ERR_SCAN_ACTIVE, "scan already in progress")))


class EmulatorServer(socketserver.ThreadingTCPServer):
    """Bindable emulator; use as a context manager or via serve_forever."""

    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, address, scene: PoolScene,
                 lines_per_second: float = DEFAULT_LINES_PER_SECOND,
                 conditions=POOL_CONDITIONS):
        super().__init__(address, _Handler)
        self.scene = scene
        self.lines_per_second = lines_per_second
        self.conditions = conditions

    def serve_background(self) -> threading.Thread:
        thread = threading.Thread(target=self.serve_forever, daemon=True)
        thread.start()
        return thread


def serve_emulator(host: str, port: int, scene: PoolScene,
                   lines_per_second: float = DEFAULT_LINES_PER_SECOND
                   ) -> EmulatorServer:
    server = EmulatorServer((host, port), scene, lines_per_second)
    server.serve_background()
    return server
