"""
Execução de um cenário: dois nós conectados pela pilha completa, o
emissor publicando ``packet_count`` mensagens em intervalos fixos a partir
do Ready da conexão e o receptor assinando o tópico.
"""
import logging
import os
import struct
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from dados_comuns.conf import oec_setting
from dados_comuns.utils import s_to_us, us_to_ms
from experimento.constants import ENTREGUE, FOLGA_FINAL_S, INDICE_BYTES, LIMITE_DRENAGEM_S
from experimento.exceptions import ExperimentoError
from experimento.node import SimNode
from experimento.reports import PacketRecord, report_stats
from mesh_transport.network import MeshNetwork
from sim_network.churn import schedule_churn
from sim_network.scenario import ScenarioConfig
from sim_network.simulator import Simulator

logger = logging.getLogger(__name__)

INDICE = struct.Struct(">I")


@dataclass
class ExperimentResult:
    config: ScenarioConfig
    seed: int
    records: list
    report: object
    ready_at_ms: float = None
    keep_alive_rtts_ms: list = field(default_factory=list)
    fim_ms: float = 0.0
    eventos: int = 0
    contadores: dict = field(default_factory=dict)

    @property
    def breakdown(self):
        return [(r.index, r.mesh_ms, r.bridge_ms, r.link_ms) for r in self.records if r.delivered]

    @property
    def summary(self):
        return {
            "cenario": self.config.nome,
            "posicao": self.config.position,
            "seed": self.seed,
            "enviados": self.report.sent,
            "entregues": self.report.delivered,
            "pdr": self.report.pdr,
            "latencia_media_ms": self.report.mean_latency,
            "desvio_padrao_ms": self.report.stddev,
        }


def payload_do_pacote(indice, tamanho):
    """Índice de 4 bytes seguido de enchimento determinístico."""
    return INDICE.pack(indice) + bytes(i % 251 for i in range(tamanho - INDICE_BYTES))


class _Coleta:
    def __init__(self, sim, n):
        self.sim = sim
        self.n = n
        self.enviados = {}
        self.recebidos = {}
        self.chaves = {}
        self.handles = {}

    def publicado(self, indice, chave):
        self.enviados[indice] = self.sim.now_us()
        if chave is not None:
            self.chaves[chave] = indice

    def on_send(self, handle):
        for chave in handle.etiquetas:
            indice = self.chaves.get(chave)
            if indice is not None:
                self.handles.setdefault(indice, handle)

    def on_message(self, msg):
        indice = INDICE.unpack_from(msg.payload)[0]
        if indice in self.enviados and indice not in self.recebidos:
            self.recebidos[indice] = self.sim.now_us()

    def registros(self, relatorios):
        registros = []
        for indice in range(self.n):
            registro = PacketRecord(index=indice)
            enviado = self.enviados.get(indice)
            if enviado is not None:
                registro.sent_at = us_to_ms(enviado)
            recebido = self.recebidos.get(indice)
            if enviado is not None and recebido is not None:
                registro.received_at = us_to_ms(recebido)
                registro.latency = us_to_ms(recebido - enviado)
                registro.status = ENTREGUE
                self._decompor(registro, relatorios)
            registros.append(registro)
        return registros

    def _decompor(self, registro, relatorios):
        handle = self.handles.get(registro.index)
        relatorio = relatorios.get(handle.msg_id) if handle is not None else None
        if relatorio is None:
            return
        registro.mesh_ms = us_to_ms(relatorio.mesh_us)
        registro.link_ms = us_to_ms(relatorio.link_us)
        registro.bridge_ms = registro.latency - registro.mesh_ms - registro.link_ms


def horizonte_us(config):
    """Instante final da simulação: churn, conexão, publicações e folga."""
    conexao_s = oec_setting("OEC_CONNECT_TIMEOUT_S", 30) * (oec_setting("OEC_CONNECT_RETRIES", 3) + 1)
    churn_s = max(
        [t for c in config.churn for t in (c.leave_at_s, c.join_at_s) if t is not None],
        default=0,
    )
    publicacoes_s = (config.packet_count - 1) * config.send_interval_s
    return s_to_us(churn_s + conexao_s + publicacoes_s + FOLGA_FINAL_S)


def run_experiment(config, seed=None):
    if not isinstance(config, ScenarioConfig):
        raise ExperimentoError("run_experiment exige um ScenarioConfig")
    seed = config.seed if seed is None else seed
    sim = Simulator()
    network = MeshNetwork(sim, config.topology(), config.mesh)
    nos = {spec.name: SimNode(spec, sim, network, config, seed) for spec in config.nodes}
    emissor = nos[config.sender.name]
    receptor = nos[config.receiver.name]
    coleta = _Coleta(sim, config.packet_count)
    intervalo_us = s_to_us(config.send_interval_s)
    estado = {"ready_at": None}

    def publicar(indice):
        if indice >= config.packet_count:
            return
        sim.call_later(intervalo_us, publicar, indice + 1)
        if not emissor.online:
            coleta.publicado(indice, None)
            return
        payload = payload_do_pacote(indice, config.message_size_bytes)
        msg = emissor.pubsub.publish(config.topic, payload)
        coleta.publicado(indice, msg.key)

    def conexao_pronta(conn):
        if conn.remote_peer != receptor.peer_id or estado["ready_at"] is not None:
            return
        estado["ready_at"] = sim.now_us()
        logger.info(f"Conexão {emissor.name} -> {receptor.name} pronta; iniciando publicações")
        sim.call_later(0, publicar, 0)

    emissor.host.auto_connect.add(receptor.peer_id)
    emissor.host.on_connection_ready.append(conexao_pronta)
    emissor.host.on_send.append(coleta.on_send)
    receptor.pubsub.subscribe(config.topic, handler=coleta.on_message)

    for no in nos.values():
        sim.call_later(0, no.join)
    for evento in config.churn:
        schedule_churn(sim, nos[evento.node], join_at=evento.join_at_s, leave_at=evento.leave_at_s)

    fim = horizonte_us(config)
    logger.info(f"Executando {config.nome}{'/' + config.position if config.position else ''} seed {seed}")
    stats = sim.run_until(fim)
    limite = fim + s_to_us(LIMITE_DRENAGEM_S)
    while emissor.em_transito(receptor.peer_id) and stats.now_us < limite:
        logger.debug(f"{config.nome}: mensagens ainda em trânsito, estendendo a simulação")
        stats = sim.run_until(min(stats.now_us + s_to_us(FOLGA_FINAL_S), limite))

    if estado["ready_at"] is None:
        logger.warning(f"{config.nome}: a conexão não chegou a Ready; todos os pacotes perdidos")
    registros = coleta.registros(emissor.adapter.relatorios)
    relatorio = report_stats(registros)
    conexao = emissor.host.connection(receptor.peer_id)
    return ExperimentResult(
        config=config,
        seed=seed,
        records=registros,
        report=relatorio,
        ready_at_ms=us_to_ms(estado["ready_at"]) if estado["ready_at"] is not None else None,
        keep_alive_rtts_ms=[us_to_ms(rtt) for rtt in conexao.keep_alive_rtts] if conexao is not None else [],
        fim_ms=us_to_ms(stats.now_us),
        eventos=stats.eventos_executados,
        contadores={
            "mesh_emissor": dict(emissor.client.contadores),
            "mesh_receptor": dict(receptor.client.contadores),
            "floodsub_emissor": dict(emissor.pubsub.contadores),
            "floodsub_receptor": dict(receptor.pubsub.contadores),
        },
    )


def _executar(args):
    config, seed = args
    return run_experiment(config, seed)


def run_many(config, seeds, workers=None):
    """
    Uma execução por seed, em paralelo num pool de processos (um worker por
    CPU por padrão). Cada execução tem o próprio simulador, então o
    resultado é o mesmo da execução sequencial, na ordem das seeds.
    """
    if workers is None:
        workers = oec_setting("OEC_RUN_WORKERS", os.cpu_count() or 1)
    tarefas = [(config, seed) for seed in seeds]
    workers = min(workers, len(tarefas))
    if workers <= 1:
        return [_executar(t) for t in tarefas]
    logger.info(f"{config.nome}: {len(tarefas)} execuções em {workers} processos")
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_executar, tarefas))
