"""
Simulador a eventos discretos com relógio virtual em microssegundos.

A fila e o relógio são de um simpy.Environment: cada evento vira um
Timeout cujo callback executa a ação. Eventos no mesmo instante rodam na
ordem em que foram agendados (at, seq); um evento em execução só pode
agendar eventos em at >= agora. O simulador também implementa a interface
de relógio de dados_comuns.clock, então Bridge, mesh e host rodam sobre ele.
"""
import itertools
import logging
import queue
from dataclasses import dataclass, field

import simpy

from dados_comuns.context import relogio_ativo
from sim_network.exceptions import PastEventError

logger = logging.getLogger(__name__)


@dataclass(order=True)
class SimEvent:
    at: int
    seq: int = None
    action: object = field(default=None, compare=False)
    args: tuple = field(default=(), compare=False)
    cancelado: bool = field(default=False, compare=False)

    def cancel(self):
        self.cancelado = True


@dataclass(frozen=True)
class SimStats:
    now_us: int
    eventos_executados: int
    eventos_pendentes: int
    eventos_cancelados: int


def nome_da_acao(action):
    return getattr(action, "__qualname__", None) or type(action).__name__


class Simulator:
    def __init__(self, trace=False):
        self.env = simpy.Environment(initial_time=0)
        self._seq = itertools.count()
        self._pendentes = {}
        self._externos = queue.SimpleQueue()
        self.trace = [] if trace else None
        self.executados = 0
        self.cancelados = 0

    def now_us(self):
        return int(self.env.now)

    def schedule(self, event):
        agora = self.now_us()
        if event.at < agora:
            raise PastEventError(
                f"evento {nome_da_acao(event.action)} em {event.at}µs antes do relógio {agora}µs"
            )
        if event.seq is None:
            event.seq = next(self._seq)
        self._pendentes[event.seq] = event
        timeout = self.env.timeout(int(event.at) - agora)
        timeout.callbacks.append(lambda _timeout, evento=event: self._executar(evento))
        return event

    def at(self, at_us, action, *args):
        return self.schedule(SimEvent(int(at_us), None, action, args))

    def call_later(self, delay_us, action, *args):
        return self.at(self.now_us() + int(delay_us), action, *args)

    def call_soon_threadsafe(self, action, *args):
        self._externos.put((action, args))

    def _drenar_externos(self):
        while True:
            try:
                action, args = self._externos.get_nowait()
            except queue.Empty:
                return
            self.call_later(0, action, *args)

    def _executar(self, evento):
        self._pendentes.pop(evento.seq, None)
        if evento.cancelado:
            self.cancelados += 1
            return
        if self.trace is not None:
            self.trace.append((evento.at, evento.seq, nome_da_acao(evento.action)))
        evento.action(*evento.args)
        self.executados += 1

    def run_until(self, t_end):
        """Executa todos os eventos com at <= t_end; o relógio termina em t_end."""
        t_end = int(t_end)
        with relogio_ativo(self):
            self._drenar_externos()
            while self.env.peek() <= t_end:
                self.env.step()
                self._drenar_externos()
            if t_end > self.env.now:
                self.env.run(until=t_end)
        return self.stats()

    def stats(self):
        return SimStats(
            now_us=self.now_us(),
            eventos_executados=self.executados,
            eventos_pendentes=sum(1 for e in self._pendentes.values() if not e.cancelado),
            eventos_cancelados=self.cancelados,
        )
