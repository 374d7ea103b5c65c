"""
Rede Bluetooth Mesh simulada.

Mensagens não segmentadas saem t_count + 1 vezes, espaçadas de t_int + 10 ms,
cada transmissão com seu próprio sorteio de perda por receptor. Um segmento
é um evento com tempo de ar avg_tx_time(cfg, 1, t_count) e um sorteio.
Envios segmentados unicast usam ACK por segmento e passes de retransmissão;
envios segmentados para grupo não têm ACK e repetem cada segmento
retries_multicast + 1 vezes.
"""
import logging
from collections import Counter, OrderedDict, deque
from dataclasses import dataclass, field

from dados_comuns.utils import ms_to_us
from mesh_transport.addresses import MeshAddress, is_group
from mesh_transport.config import MeshConfig
from mesh_transport.constants import ACKED, ATRASO_ACK_MS, CUSTO_TRANSMISSAO_MS, FAILED, SENT
from mesh_transport.exceptions import (
    AddressCollisionError,
    MeshPayloadTooLarge,
    NotProvisionedError,
)
from mesh_transport.timing import avg_tx_time, seg_interval, segment_count, segment_spacing
from sim_network.links import FORA_DE_ALCANCE, LinkDelivered, link_transmit

logger = logging.getLogger(__name__)

HISTORICO_MAX = 512


@dataclass
class MeshCompletion:
    """Resultado de um mesh_send: acked, failed ou sent (sem confirmação)."""

    dst: int
    n_segments: int
    started_at: int = None
    status: str = None
    finished_at: int = None
    delivered_at: int = None
    critical_link_us: int = 0
    attempts: int = 0
    entregas: int = 0
    motivo: str = ""
    _callbacks: list = field(default_factory=list, repr=False)

    @property
    def done(self):
        return self.status is not None

    def add_done_callback(self, fn):
        if self.done:
            fn(self)
        else:
            self._callbacks.append(fn)

    def _concluir(self, status, agora, motivo=""):
        self.status = status
        self.finished_at = agora
        self.motivo = motivo
        callbacks, self._callbacks = self._callbacks, []
        for fn in callbacks:
            fn(self)


@dataclass(eq=False)
class _Envio:
    remetente: object
    origem: int
    seq: int
    dst: int
    payload: bytes
    segmentos: list
    segmentado: bool
    completion: MeshCompletion
    ttl: int
    destino: object = None
    acked: set = field(default_factory=set)
    passes: int = 0
    verificacao: object = None
    ativo: bool = True

    @property
    def grupo(self):
        return is_group(self.dst)


class MeshNetwork:
    def __init__(self, clock, topology, config=None):
        self.clock = clock
        self.topology = topology
        self.config = config or MeshConfig()
        self.clients = {}

    def provision(self, client, unicast, groups=()):
        endereco = MeshAddress.parse(unicast)
        if not endereco.is_unicast:
            raise ValueError(f"{endereco} não é um endereço unicast")
        atual = self.clients.get(endereco.value)
        if atual is not None and atual is not client:
            raise AddressCollisionError(f"endereço {endereco} já provisionado para {atual.node}")
        grupos = frozenset(MeshAddress.parse(g).value for g in groups)
        invalidos = sorted(g for g in grupos if not is_group(g))
        if invalidos:
            raise ValueError(f"endereços de grupo inválidos: {invalidos}")
        if client.unicast is not None and client.unicast != endereco.value:
            self.clients.pop(client.unicast, None)
        client.unicast = endereco.value
        client.groups = grupos
        client.network = self
        self.clients[endereco.value] = client
        logger.info(
            f"Nó {client.node} provisionado como {endereco} nos grupos "
            f"{', '.join(str(MeshAddress(g)) for g in sorted(grupos)) or '-'}"
        )

    def client(self, address):
        return self.clients.get(int(address))

    def set_online(self, address, online):
        self.clients[int(address)].set_online(online)

    def link_between(self, a, b):
        return self.topology.link(a.node, b.node)

    def subscribers(self, group):
        return [self.clients[a] for a in sorted(self.clients) if group in self.clients[a].groups]


def provision(client, unicast, groups=()):
    client.network.provision(client, unicast, groups)


class MeshClient:
    """Cliente mesh ligado a um nó da topologia; um envio em voo por vez."""

    def __init__(self, network, node, rng, network_key_id="oec", on_message=None):
        self.network = network
        self.node = node
        self.rng = rng
        self.network_key_id = network_key_id
        self.on_message = on_message
        self.unicast = None
        self.groups = frozenset()
        self.online = True
        self.contadores = Counter()
        self._fila = deque()
        self._em_voo = None
        self._seq = 0
        self._parciais = OrderedDict()
        self._entregues = OrderedDict()

    @property
    def clock(self):
        return self.network.clock

    @property
    def cfg(self):
        return self.network.config

    @property
    def ocupado(self):
        return self._em_voo is not None or bool(self._fila)

    def __repr__(self):
        return f"MeshClient({self.node}, {MeshAddress(self.unicast) if self.unicast else '-'})"

    # envio

    def mesh_send(self, dst, payload, on_complete=None):
        if self.unicast is None:
            raise NotProvisionedError(f"nó {self.node} não provisionado")
        if not payload:
            raise ValueError("payload vazio")
        if len(payload) > self.cfg.max_payload:
            raise MeshPayloadTooLarge(
                f"payload de {len(payload)} bytes excede {self.cfg.max_payload} bytes"
            )
        dst = MeshAddress.parse(dst).value
        segmentado = len(payload) > self.cfg.unsegmented_max
        tamanho = self.cfg.mesh_seg_payload
        segmentos = (
            [payload[i:i + tamanho] for i in range(0, len(payload), tamanho)]
            if segmentado
            else [bytes(payload)]
        )
        completion = MeshCompletion(dst=dst, n_segments=segment_count(self.cfg, len(payload)))
        if on_complete is not None:
            completion.add_done_callback(on_complete)
        self._seq += 1
        envio = _Envio(
            remetente=self,
            origem=self.unicast,
            seq=self._seq,
            dst=dst,
            payload=bytes(payload),
            segmentos=segmentos,
            segmentado=segmentado,
            completion=completion,
            ttl=self.cfg.relay_ttl,
        )
        if not self.online:
            completion.started_at = self.clock.now_us()
            completion._concluir(FAILED, self.clock.now_us(), "nó offline")
            return completion
        self._fila.append(envio)
        self._iniciar_proximo()
        return completion

    def broadcast_presence(self, payload):
        """Envia o payload para todos os grupos em que o cliente está inscrito."""
        if self.unicast is None:
            raise NotProvisionedError(f"nó {self.node} não provisionado")
        return [self.mesh_send(grupo, payload) for grupo in sorted(self.groups)]

    def _iniciar_proximo(self):
        if self._em_voo is not None or not self._fila or not self.online:
            return
        envio = self._fila.popleft()
        self._em_voo = envio
        envio.completion.started_at = self.clock.now_us()
        if envio.grupo:
            self._enviar_grupo(envio)
        else:
            self._enviar_unicast(envio)

    def _finalizar(self, envio, status, motivo=""):
        if not envio.ativo:
            return
        envio.ativo = False
        if envio.verificacao is not None:
            envio.verificacao.cancel()
        if self._em_voo is envio:
            self._em_voo = None
        envio.completion._concluir(status, self.clock.now_us(), motivo)
        self.clock.call_later(0, self._iniciar_proximo)

    def _airtime_us(self, grupo):
        return ms_to_us(avg_tx_time(self.cfg, 1, self.cfg.t_count_para(grupo)))

    def _sortear(self, receptor):
        link = self.network.link_between(self, receptor)
        if link is None:
            return FORA_DE_ALCANCE
        return link_transmit(None, link, self.rng)

    def _transmitir_para(self, envio, indice, receptores, atraso_us=None):
        envio.completion.attempts += 1
        self.contadores["transmissoes"] += 1
        atraso = self._airtime_us(envio.grupo) if atraso_us is None else atraso_us
        for receptor in receptores:
            resultado = self._sortear(receptor)
            if isinstance(resultado, LinkDelivered):
                self.clock.call_later(
                    atraso + resultado.latency_us,
                    receptor._receber_segmento,
                    envio,
                    indice,
                    resultado.latency_us,
                )
            else:
                self.contadores["perdas"] += 1
                logger.debug(
                    f"{self.node}: segmento {indice} de {envio.origem:#06x}/{envio.seq} "
                    f"perdido para {receptor.node} ({resultado.motivo})"
                )

    def _enviar_unicast(self, envio):
        destino = self.network.clients.get(envio.dst)
        link = self.network.link_between(self, destino) if destino is not None else None
        if destino is None or link is None or not link.in_range:
            logger.warning(f"{self.node}: destino {MeshAddress(envio.dst)} inalcançável")
            self._finalizar(envio, FAILED, "destino inalcançável")
            return
        envio.destino = destino
        if not envio.segmentado:
            self._enviar_nao_segmentado(envio, [destino])
            return
        self._passe(envio)

    def _enviar_nao_segmentado(self, envio, receptores):
        """Transmissão original mais t_count repetições a cada t_int + 10 ms."""
        passo = ms_to_us(self.cfg.t_int_ms + CUSTO_TRANSMISSAO_MS)
        for k in range(self.cfg.t_count_para(envio.grupo) + 1):
            self.clock.call_later(k * passo, self._repetir, envio, receptores)
        self.clock.call_later(self._airtime_us(envio.grupo), self._finalizar, envio, SENT)

    def _repetir(self, envio, receptores):
        if not envio.ativo:
            return
        self._transmitir_para(envio, 0, receptores, atraso_us=ms_to_us(CUSTO_TRANSMISSAO_MS))

    def _passe(self, envio):
        envio.passes += 1
        pendentes = [i for i in range(len(envio.segmentos)) if i not in envio.acked]
        if envio.passes > 1:
            self.contadores["retransmissoes"] += len(pendentes)
            logger.debug(
                f"{self.node}: passe {envio.passes} retransmitindo {len(pendentes)} segmentos "
                f"para {MeshAddress(envio.dst)}"
            )
        espaco = ms_to_us(segment_spacing(self.cfg, grupo=False))
        for k, indice in enumerate(pendentes):
            self.clock.call_later(k * espaco, self._transmitir_segmento, envio, indice)
        ultimo = (len(pendentes) - 1) * espaco
        envio.verificacao = self.clock.call_later(
            ultimo + ms_to_us(self.cfg.ack_timeout_ms), self._verificar_acks, envio, envio.passes
        )

    def _transmitir_segmento(self, envio, indice):
        if not envio.ativo or indice in envio.acked:
            return
        self._transmitir_para(envio, indice, [envio.destino])

    def _verificar_acks(self, envio, passe):
        if not envio.ativo or passe != envio.passes:
            return
        if envio.passes > self.cfg.retries_unicast:
            faltando = len(envio.segmentos) - len(envio.acked)
            logger.warning(
                f"{self.node}: envio para {MeshAddress(envio.dst)} falhou, "
                f"{faltando} segmentos sem ACK após {envio.passes} tentativas"
            )
            self._finalizar(envio, FAILED, "retransmissões esgotadas")
            return
        self._passe(envio)

    def _receber_ack(self, envio, indice):
        if not envio.ativo or not self.online:
            return
        envio.acked.add(indice)
        if len(envio.acked) == len(envio.segmentos):
            self._finalizar(envio, ACKED)

    def _enviar_grupo(self, envio):
        receptores = [
            c for c in self.network.subscribers(envio.dst)
            if c is not self and c.unicast != envio.origem
            and self.network.link_between(self, c) is not None
        ]
        if not envio.segmentado:
            self._enviar_nao_segmentado(envio, receptores)
            return
        espaco = ms_to_us(segment_spacing(self.cfg, grupo=True))
        k = 0
        for _ in range(self.cfg.retries_multicast + 1):
            for indice in range(len(envio.segmentos)):
                self.clock.call_later(k * espaco, self._transmitir_segmento_grupo, envio, indice, receptores)
                k += 1
        self.clock.call_later((k - 1) * espaco + self._airtime_us(True), self._finalizar, envio, SENT)

    def _transmitir_segmento_grupo(self, envio, indice, receptores):
        if not envio.ativo:
            return
        self._transmitir_para(envio, indice, receptores)

    # recepção

    def _receber_segmento(self, envio, indice, latencia_us):
        if not self.online:
            return
        if envio.dst != self.unicast and envio.dst not in self.groups:
            return
        if envio.segmentado and not envio.grupo:
            self.clock.call_later(
                ms_to_us(seg_interval(self.cfg.rx_seg_int_step)), self._enviar_ack, envio, indice
            )
        chave = (envio.origem, envio.seq)
        if chave in self._entregues:
            return
        parcial = self._parciais.setdefault(chave, {})
        parcial[indice] = envio.segmentos[indice]
        if len(parcial) < len(envio.segmentos):
            self._limitar(self._parciais)
            return
        del self._parciais[chave]
        self._entregues[chave] = self.clock.now_us()
        self._limitar(self._entregues)
        payload = b"".join(parcial[i] for i in range(len(envio.segmentos)))
        envio.completion.delivered_at = self.clock.now_us()
        envio.completion.critical_link_us = latencia_us
        envio.completion.entregas += 1
        self.contadores["entregas"] += 1
        if self.on_message is not None:
            self.on_message(envio.origem, envio.dst, payload)
        if envio.grupo and self.cfg.relay and envio.ttl > 1:
            self._retransmitir(envio, payload)

    def _enviar_ack(self, envio, indice):
        if not self.online:
            return
        link = self.network.link_between(self, envio.remetente)
        if link is None:
            return
        resultado = link_transmit(None, link.com(loss_p=0.0), self.rng)
        if isinstance(resultado, LinkDelivered):
            self.contadores["acks"] += 1
            self.clock.call_later(
                ms_to_us(ATRASO_ACK_MS) + resultado.latency_us, envio.remetente._receber_ack, envio, indice
            )

    def _retransmitir(self, envio, payload):
        copia = _Envio(
            remetente=self,
            origem=envio.origem,
            seq=envio.seq,
            dst=envio.dst,
            payload=payload,
            segmentos=envio.segmentos,
            segmentado=envio.segmentado,
            completion=MeshCompletion(dst=envio.dst, n_segments=len(envio.segmentos)),
            ttl=envio.ttl - 1,
        )
        self.contadores["relays"] += 1
        logger.debug(f"{self.node}: retransmitindo {envio.origem:#06x}/{envio.seq} (ttl {copia.ttl})")
        self._fila.append(copia)
        self._iniciar_proximo()

    @staticmethod
    def _limitar(registro):
        while len(registro) > HISTORICO_MAX:
            registro.popitem(last=False)

    # churn

    def set_online(self, online):
        if online == self.online:
            return
        self.online = online
        if online:
            logger.info(f"{self.node}: cliente mesh de volta à rede")
            self._iniciar_proximo()
            return
        logger.info(f"{self.node}: cliente mesh saiu da rede, descartando envios em andamento")
        pendentes = ([self._em_voo] if self._em_voo is not None else []) + list(self._fila)
        self._fila.clear()
        for envio in pendentes:
            self._finalizar(envio, FAILED, "nó saiu da rede")
        self._parciais.clear()
        self._entregues.clear()
