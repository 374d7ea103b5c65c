"""
Relógios usados pelas camadas de protocolo.

Todo componente dirigido por tempo recebe um objeto com a interface:

    now_us() -> int
    call_later(delay_us, fn, *args) -> handle com cancel()
    call_soon_threadsafe(fn, *args) -> handle

O simulador (sim_network.simulator.Simulator) implementa essa interface em
microssegundos virtuais; RealTimeClock implementa em tempo de parede, para o
uso com porta serial real.
"""
import logging
import threading
import time

logger = logging.getLogger(__name__)


class TimerHandle:
    def __init__(self, timer):
        self._timer = timer

    def cancel(self):
        self._timer.cancel()


class RealTimeClock:
    """Relógio de parede; callbacks são serializados por um lock."""

    def __init__(self):
        self._inicio = time.monotonic_ns()
        self._lock = threading.RLock()

    def now_us(self):
        return (time.monotonic_ns() - self._inicio) // 1000

    def call_later(self, delay_us, fn, *args):
        timer = threading.Timer(max(delay_us, 0) / 1_000_000, self._executar, args=(fn, args))
        timer.daemon = True
        timer.start()
        return TimerHandle(timer)

    def call_soon_threadsafe(self, fn, *args):
        return self.call_later(0, fn, *args)

    def _executar(self, fn, args):
        with self._lock:
            try:
                fn(*args)
            except Exception:
                logger.exception(f"Erro ao executar callback {getattr(fn, '__qualname__', fn)}")
