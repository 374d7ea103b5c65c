import logging
import queue
from dataclasses import dataclass

from bridge.exceptions import TransportError
from dados_comuns.conf import oec_setting
from dados_comuns.exceptions import ErroOEC
from dados_comuns.utils import s_to_us
from mesh_transport.constants import ALL_NODES
from p2p_host.constants import (
    ESTAGIO_CONNECT,
    FAILED,
    FLOODSUB,
    IDLE,
    MUXER_PROPOSALS,
    MUXER_SUPPORTED,
    SECURITY_PROPOSALS,
    SECURITY_SUPPORTED,
    TAG_HELLO,
    TAG_PRESENCA,
    TAG_PRESENCA_RESPOSTA,
)
from p2p_host.connection import Connection
from p2p_host.exceptions import ConnectionNotReady, UnknownPeerError
from p2p_host.peer_id import PeerId, generate_static_key
from p2p_host.routing import RoutingTable

logger = logging.getLogger(__name__)


@dataclass
class _Tentativa:
    peer: PeerId
    numero: int
    conn: Connection
    timer: object = None


class _CanalBridge:
    """Canal de uma conexão: resolve o endereço mesh do peer a cada envio."""

    def __init__(self, host, peer):
        self.host = host
        self.peer = peer

    def send(self, tag, payload, etiquetas=()):
        try:
            address = self.host.routing.lookup(self.peer)
        except UnknownPeerError:
            logger.warning(f"{self.host.nome}: sem rota para {self.peer.short()}; mensagem {tag!r} descartada")
            return None
        return self.host._enviar(address, tag + payload, etiquetas)


class Host:
    """
    Host P2P de um nó: presença, tabela de roteamento, conexões e streams,
    tudo sobre o Bridge. Todos os métodos rodam no relógio do host; de
    outras threads use ``submit``.
    """

    def __init__(
        self,
        nome,
        clock,
        bridge,
        static_key=None,
        rng=None,
        keep_alive_s=None,
        keep_alive_timeout_s=None,
        connect_timeout_s=None,
        connect_retries=None,
        presence_address=ALL_NODES,
        security_proposals=SECURITY_PROPOSALS,
        security_supported=SECURITY_SUPPORTED,
        muxer_proposals=MUXER_PROPOSALS,
        muxer_supported=MUXER_SUPPORTED,
        pubsub_protocol=FLOODSUB,
    ):
        self.nome = nome
        self.clock = clock
        self.bridge = bridge
        self.rng = rng
        self.static_key = static_key or generate_static_key(rng)
        self.peer_id = PeerId.from_public_key(self.static_key)
        self.keep_alive_s = keep_alive_s
        self.keep_alive_timeout_s = keep_alive_timeout_s
        if connect_timeout_s is None:
            connect_timeout_s = oec_setting("OEC_CONNECT_TIMEOUT_S", 30)
        if connect_retries is None:
            connect_retries = oec_setting("OEC_CONNECT_RETRIES", 3)
        self.connect_timeout_s = connect_timeout_s
        self.connect_timeout_us = s_to_us(connect_timeout_s)
        self.connect_retries = connect_retries
        self.presence_address = presence_address
        self.opcoes_conexao = dict(
            security_proposals=security_proposals,
            security_supported=security_supported,
            muxer_proposals=muxer_proposals,
            muxer_supported=muxer_supported,
            pubsub_protocol=pubsub_protocol,
        )

        self.routing = RoutingTable()
        self.connections = {}
        self.handlers = {}
        self.auto_connect = set()
        self.ativo = False
        self.on_peer_discovered = []
        self.on_connection_ready = []
        self.on_connection_failed = []
        self.on_send = []
        self._tentativas = {}
        self._comandos = queue.SimpleQueue()
        bridge.on_deliver = self._on_bridge_payload

    def __repr__(self):
        return f"<Host {self.nome} {self.peer_id.short()}>"

    # ciclo de vida

    def start(self):
        self.ativo = True
        logger.info(f"{self.nome}: host {self.peer_id} iniciado")
        self.announce_presence()

    def stop(self):
        for peer in list(self.connections):
            self._descartar(peer, "host encerrado")
        for tentativa in self._tentativas.values():
            if tentativa.timer is not None:
                tentativa.timer.cancel()
        self._tentativas.clear()
        self.routing.clear()
        self.ativo = False
        logger.info(f"{self.nome}: host encerrado")

    def announce_presence(self):
        return self._enviar(self.presence_address, TAG_PRESENCA + self.peer_id.to_bytes())

    def set_stream_handler(self, protocol_id, handler):
        self.handlers[protocol_id] = handler

    def submit(self, fn, *args, **kwargs):
        """Enfileira um comando vindo de outra thread; roda no relógio do host."""
        self._comandos.put((fn, args, kwargs))
        self.clock.call_soon_threadsafe(self._drenar_comandos)

    def _drenar_comandos(self):
        while True:
            try:
                fn, args, kwargs = self._comandos.get_nowait()
            except queue.Empty:
                return
            try:
                fn(*args, **kwargs)
            except ErroOEC:
                logger.exception(f"{self.nome}: comando {getattr(fn, '__qualname__', fn)} falhou")

    # envio

    def _enviar(self, address, payload, etiquetas=()):
        try:
            handle = self.bridge.bridge_send(payload, address, etiquetas)
        except TransportError as exc:
            logger.warning(f"{self.nome}: envio para 0x{address:04X} descartado ({exc})")
            return None
        for callback in self.on_send:
            callback(handle)
        return handle

    # recepção

    def _on_bridge_payload(self, source, payload):
        if not payload:
            return
        tag, corpo = bytes(payload[:1]), bytes(payload[1:])
        try:
            if tag in (TAG_PRESENCA, TAG_PRESENCA_RESPOSTA):
                self._on_presenca(source, PeerId.from_bytes(corpo), resposta=tag == TAG_PRESENCA_RESPOSTA)
                return
            if tag == TAG_HELLO:
                self._on_hello(source, PeerId.from_bytes(corpo), corpo)
                return
        except UnicodeDecodeError:
            logger.warning(f"{self.nome}: peer ID ilegível de 0x{source:04X}")
            return
        peer = self.routing.peer_for(source)
        conn = self.connections.get(peer) if peer is not None else None
        if conn is None:
            logger.debug(f"{self.nome}: mensagem {tag!r} de 0x{source:04X} sem conexão")
            return
        conn.receive(tag, corpo)

    def _on_presenca(self, source, peer, resposta):
        if peer == self.peer_id:
            return
        novo = self.routing.update(peer, source, self.clock.now_us())
        conn = self.connections.get(peer)
        reconectar = False
        if not resposta:
            if conn is not None:
                logger.info(f"{self.nome}: {peer.short()} reiniciou; conexão descartada")
                reconectar = conn.initiator
                self._descartar(peer, "peer reiniciou")
            if novo or conn is not None:
                self._enviar(source, TAG_PRESENCA_RESPOSTA + self.peer_id.to_bytes())
        if novo:
            logger.info(f"{self.nome}: peer {peer.short()} descoberto em 0x{source:04X}")
        for callback in list(self.on_peer_discovered):
            callback(peer, source)
        if reconectar or peer in self.auto_connect:
            self._conectar_se_livre(peer)

    def _on_hello(self, source, peer, corpo):
        self.routing.update(peer, source, self.clock.now_us())
        existente = self.connections.get(peer)
        if existente is not None and existente.phase != FAILED:
            if existente.initiator and existente.phase == IDLE:
                if self.peer_id < peer:
                    logger.info(f"{self.nome}: abertura simultânea com {peer.short()}; permanece iniciador")
                    return
                logger.info(f"{self.nome}: abertura simultânea com {peer.short()}; passa a respondedor")
            self._descartar(peer, "novo hello do peer")
        conn = self._nova_conexao(peer, initiator=False)
        conn.receive(TAG_HELLO, corpo)

    # conexões

    def _nova_conexao(self, peer, initiator):
        conn = Connection(
            initiator,
            self.clock,
            _CanalBridge(self, peer),
            self.static_key,
            remote_peer=peer,
            handlers=self.handlers,
            keep_alive_s=self.keep_alive_s,
            keep_alive_timeout_s=self.keep_alive_timeout_s,
            connect_timeout_s=self.connect_timeout_s,
            ephemeral_key=generate_static_key(self.rng),
            nome=self.nome,
            **self.opcoes_conexao,
        )
        conn.on_ready.append(self._on_conexao_pronta)
        conn.on_failed.append(self._on_conexao_falhou)
        self.connections[peer] = conn
        return conn

    def connection(self, peer):
        return self.connections.get(peer)

    def connect_to_peer(self, peer):
        """
        Abre (ou devolve) a conexão com ``peer``. Cada tentativa tem prazo
        próprio; esgotadas as retentativas a conexão fica em Failed("connect").
        """
        self.routing.lookup(peer)
        existente = self.connections.get(peer)
        if existente is not None and existente.phase != FAILED:
            return existente
        return self._tentar(peer, 0)

    def _conectar_se_livre(self, peer):
        existente = self.connections.get(peer)
        if existente is not None and existente.phase != FAILED:
            return
        if peer in self._tentativas:
            return
        self.connect_to_peer(peer)

    def _tentar(self, peer, numero):
        conn = self._nova_conexao(peer, initiator=True)
        tentativa = _Tentativa(peer, numero, conn)
        tentativa.timer = self.clock.call_later(self.connect_timeout_us, self._prazo_esgotado, tentativa)
        self._tentativas[peer] = tentativa
        if numero:
            logger.info(f"{self.nome}: retentativa {numero} de conexão com {peer.short()}")
        conn.start()
        return conn

    def _prazo_esgotado(self, tentativa):
        if self._tentativas.get(tentativa.peer) is not tentativa or tentativa.conn.ready:
            return
        del self._tentativas[tentativa.peer]
        conn = tentativa.conn
        final = tentativa.numero >= self.connect_retries
        if not final:
            self.connections.pop(tentativa.peer, None)
        conn.fail(ESTAGIO_CONNECT, f"sem Ready em {self.connect_timeout_us / 1e6:.0f} s (tentativa {tentativa.numero + 1})")
        if not final:
            self._tentar(tentativa.peer, tentativa.numero + 1)

    def _encerrar_tentativa(self, conn):
        tentativa = self._tentativas.get(conn.remote_peer)
        if tentativa is not None and tentativa.conn is conn:
            if tentativa.timer is not None:
                tentativa.timer.cancel()
            del self._tentativas[conn.remote_peer]

    def _on_conexao_pronta(self, conn):
        self._encerrar_tentativa(conn)
        espera = (conn.ready_at - conn.created_at) / 1e6
        logger.info(f"{self.nome}: conexão com {conn.remote_peer.short()} pronta em {espera:.2f} s")
        for callback in list(self.on_connection_ready):
            callback(conn)

    def _on_conexao_falhou(self, conn):
        if self.connections.get(conn.remote_peer) is not conn:
            return
        self._encerrar_tentativa(conn)
        for callback in list(self.on_connection_failed):
            callback(conn)

    def _descartar(self, peer, motivo):
        conn = self.connections.pop(peer, None)
        tentativa = self._tentativas.pop(peer, None)
        if tentativa is not None and tentativa.timer is not None:
            tentativa.timer.cancel()
        if conn is not None:
            conn.close(motivo)

    def open_stream(self, peer, protocol_id):
        conn = self.connections.get(peer)
        if conn is None:
            raise ConnectionNotReady(f"sem conexão com {peer}")
        return conn.open_stream(protocol_id)

    def ready_connections(self):
        return [c for c in self.connections.values() if c.ready]
