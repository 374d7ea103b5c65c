"""
Conexão entre dois hosts sobre um canal de mensagens (o Bridge, ou um
loopback nos testes).

Fases: Idle -> PeerExchanged -> MultistreamAgreed -> Secured -> Muxed -> Ready,
e Failed a partir de qualquer uma delas.
"""
import logging
import struct
from collections import Counter
from dataclasses import dataclass

from dados_comuns.conf import oec_setting
from dados_comuns.utils import s_to_us
from p2p_host.constants import (
    ESTAGIO_ENCERRADA,
    ESTAGIO_HANDSHAKE,
    ESTAGIO_MUXER,
    ESTAGIO_PEER,
    ESTAGIO_PUBSUB,
    ESTAGIO_SECURE_CHANNEL,
    ESTAGIO_SECURITY,
    FAILED,
    FASES,
    FLOODSUB,
    IDLE,
    MAX_SELADO_PLAINTEXT,
    MULTISTREAM_AGREED,
    MUXED,
    MUXER_PROPOSALS,
    MUXER_SUPPORTED,
    NOISE,
    PEER_EXCHANGED,
    READY,
    SECURED,
    SECURITY_PROPOSALS,
    SECURITY_SUPPORTED,
    TAG_HANDSHAKE,
    TAG_HELLO,
    TAG_HELLO_RESPOSTA,
    TAG_RAW,
    TAG_SELADO,
)
from p2p_host.exceptions import (
    ConnectionNotReady,
    HandshakeError,
    MultistreamEncodingError,
    MuxError,
    NegotiationError,
    SecureChannelError,
    UnknownPeerError,
)
from p2p_host.handshake import HandshakeInitiator, HandshakeResponder
from p2p_host.multistream import MultistreamDialer, MultistreamListener
from p2p_host.muxer import PING, STREAM_CONTROLE, Muxer, MuxFrame
from p2p_host.peer_id import PeerId

logger = logging.getLogger(__name__)

PING_SEQ = struct.Struct(">Q")

ESTAGIO_POR_FASE = {
    IDLE: ESTAGIO_PEER,
    PEER_EXCHANGED: ESTAGIO_SECURITY,
    MULTISTREAM_AGREED: ESTAGIO_HANDSHAKE,
    SECURED: ESTAGIO_MUXER,
    MUXED: ESTAGIO_PUBSUB,
    READY: ESTAGIO_SECURE_CHANNEL,
}


@dataclass
class ConnectionState:
    phase: str = IDLE
    selected_security: str = None
    selected_muxer: str = None
    session_key: bytes = None
    failed_stage: str = None
    motivo: str = ""

    @property
    def ready(self):
        return self.phase == READY

    @property
    def failed(self):
        return self.phase == FAILED


class LoopbackChannel:
    """Canal em memória; entrega cada mensagem após ``delay_us`` no relógio."""

    def __init__(self, clock, lado, transcript, delay_us=1000):
        self.clock = clock
        self.lado = lado
        self.transcript = transcript
        self.delay_us = delay_us
        self.destino = None
        self.adulterar = None

    def send(self, tag, payload, etiquetas=()):
        self.transcript.append((self.lado, tag, bytes(payload)))
        if self.adulterar is not None:
            payload = self.adulterar(tag, bytes(payload))
            if payload is None:
                return None
        self.clock.call_later(self.delay_us, self.destino.receive, tag, bytes(payload))
        return None


def loopback_pair(clock, delay_us=1000):
    transcript = []
    return (
        LoopbackChannel(clock, "I", transcript, delay_us),
        LoopbackChannel(clock, "R", transcript, delay_us),
    )


class Connection:
    def __init__(
        self,
        initiator,
        clock,
        channel,
        static_key,
        remote_peer=None,
        handlers=None,
        security_proposals=SECURITY_PROPOSALS,
        security_supported=SECURITY_SUPPORTED,
        muxer_proposals=MUXER_PROPOSALS,
        muxer_supported=MUXER_SUPPORTED,
        pubsub_protocol=FLOODSUB,
        keep_alive_s=None,
        keep_alive_timeout_s=None,
        connect_timeout_s=None,
        ephemeral_key=None,
        nome="",
    ):
        self.initiator = initiator
        self.clock = clock
        self.channel = channel
        self.static_key = static_key
        self.local_peer = PeerId.from_public_key(static_key)
        self.remote_peer = remote_peer
        self.handlers = handlers if handlers is not None else {}
        self.security_proposals = tuple(security_proposals)
        self.security_supported = tuple(security_supported)
        self.muxer_proposals = tuple(muxer_proposals)
        self.muxer_supported = tuple(muxer_supported)
        self.pubsub_protocol = pubsub_protocol
        if keep_alive_s is None:
            keep_alive_s = oec_setting("OEC_KEEP_ALIVE_S", 540)
        if keep_alive_timeout_s is None:
            keep_alive_timeout_s = oec_setting("OEC_KEEP_ALIVE_TIMEOUT_S", 10)
        self.keep_alive_us = s_to_us(keep_alive_s)
        if connect_timeout_s is None:
            connect_timeout_s = oec_setting("OEC_CONNECT_TIMEOUT_S", 30)
        self.keep_alive_timeout_us = s_to_us(keep_alive_timeout_s)
        self.connect_timeout_us = s_to_us(connect_timeout_s)
        self.ephemeral_key = ephemeral_key
        self.nome = nome or self.local_peer.short()

        self.state = ConnectionState()
        self.session = None
        self.muxer = None
        self.pubsub_stream = None
        self.created_at = clock.now_us()
        self.ready_at = None
        self.enviados = Counter()
        self.on_ready = []
        self.on_failed = []

        self._negociador = None
        self._handshake = None
        self._saida = []
        self._flush_agendado = None
        self._bloqueado = False
        self._timer_keep_alive = None
        self._timer_pong = None
        self._timer_negociacao = None
        self._ping_seq = 0
        self._ping_enviado_em = None
        self.keep_alive_rtts = []
        self.keep_alive_falhas = 0

    def __repr__(self):
        papel = "iniciador" if self.initiator else "respondedor"
        return f"<Connection {self.nome} {papel} {self.phase}>"

    @property
    def phase(self):
        return self.state.phase

    @property
    def ready(self):
        return self.state.ready

    @property
    def bloqueada(self):
        return self._bloqueado

    @property
    def pendente(self):
        return bool(self._saida)

    def _avancar(self, fase):
        if FASES.index(fase) <= FASES.index(self.phase):
            raise ValueError(f"transição {self.phase} -> {fase} fora de ordem")
        self.state.phase = fase
        logger.info(f"{self.nome}: conexão com {self._remoto()} em {fase}")

    def _remoto(self):
        return self.remote_peer.short() if self.remote_peer else "?"

    def _falhar(self, estagio, motivo=""):
        if self.phase == FAILED:
            return
        fase = self.phase
        self.state.phase = FAILED
        self.state.failed_stage = estagio
        self.state.motivo = motivo
        self._cancelar_timers()
        self._saida.clear()
        nivel = logging.INFO if estagio == ESTAGIO_ENCERRADA else logging.WARNING
        logger.log(nivel, f"{self.nome}: conexão com {self._remoto()} falhou em {estagio} (fase {fase}): {motivo}")
        for callback in list(self.on_failed):
            callback(self)

    def fail(self, estagio, motivo=""):
        self._falhar(estagio, motivo)

    def close(self, motivo=""):
        self._falhar(ESTAGIO_ENCERRADA, motivo)

    def _cancelar_timers(self):
        for atributo in ("_flush_agendado", "_timer_keep_alive", "_timer_pong", "_timer_negociacao"):
            handle = getattr(self, atributo)
            if handle is not None:
                handle.cancel()
                setattr(self, atributo, None)

    def _send(self, tag, payload, etiquetas=()):
        self.enviados[tag] += 1
        return self.channel.send(tag, payload, etiquetas)

    def _send_selado(self, plaintext, etiquetas=()):
        return self._send(TAG_SELADO, self.session.seal(plaintext), etiquetas)

    # abertura

    def start(self):
        """Iniciador: envia o hello com o próprio peer ID."""
        if not self.initiator:
            raise ValueError("somente o iniciador abre a conexão")
        if self.remote_peer is None:
            raise UnknownPeerError("conexão sem peer remoto")
        self._send(TAG_HELLO, self.local_peer.to_bytes())

    def upgrade(self):
        """Iniciador em PeerExchanged: começa a negociação de segurança."""
        if self.phase != PEER_EXCHANGED:
            raise ConnectionNotReady(f"upgrade exige {PEER_EXCHANGED}, fase atual {self.phase}")
        self._negociador = MultistreamDialer(self.security_proposals)
        self._send(TAG_RAW, self._negociador.start())
        return self.state

    def receive(self, tag, payload):
        if self.phase == FAILED:
            logger.debug(f"{self.nome}: mensagem {tag!r} ignorada em conexão falha")
            return
        try:
            if tag == TAG_HELLO:
                self._on_hello(payload)
            elif tag == TAG_HELLO_RESPOSTA:
                self._on_hello_resposta(payload)
            elif tag == TAG_RAW:
                self._on_raw(payload)
            elif tag == TAG_HANDSHAKE:
                self._on_handshake(payload)
            elif tag == TAG_SELADO:
                self._on_selado(payload)
            else:
                logger.warning(f"{self.nome}: tag desconhecida {tag!r}")
        except HandshakeError as exc:
            self._falhar(ESTAGIO_HANDSHAKE, str(exc))
        except SecureChannelError as exc:
            self._falhar(ESTAGIO_SECURE_CHANNEL, str(exc))
        except MuxError as exc:
            self._falhar(ESTAGIO_MUXER, str(exc))
        except (NegotiationError, MultistreamEncodingError) as exc:
            self._falhar(ESTAGIO_POR_FASE.get(self.phase, ESTAGIO_PEER), str(exc))
        except UnicodeDecodeError as exc:
            self._falhar(ESTAGIO_PEER, f"peer ID ilegível: {exc}")

    def _on_hello(self, payload):
        if self.initiator or self.phase != IDLE:
            logger.debug(f"{self.nome}: hello repetido ignorado")
            return
        peer = PeerId.from_bytes(payload)
        if self.remote_peer is not None and peer != self.remote_peer:
            self._falhar(ESTAGIO_PEER, f"hello de {peer.short()}, esperado {self.remote_peer.short()}")
            return
        self.remote_peer = peer
        self._send(TAG_HELLO_RESPOSTA, self.local_peer.to_bytes())
        self._avancar(PEER_EXCHANGED)
        self._negociador = MultistreamListener(self.security_supported)
        self._send(TAG_RAW, self._negociador.start())
        if self.connect_timeout_us > 0:
            self._timer_negociacao = self.clock.call_later(self.connect_timeout_us, self._negociacao_expirada)

    def _negociacao_expirada(self):
        """Respondedor sem Ready dentro do prazo: falha no estágio da fase atual."""
        self._timer_negociacao = None
        if self.phase in (READY, FAILED):
            return
        self._falhar(
            ESTAGIO_POR_FASE.get(self.phase, ESTAGIO_PEER),
            f"sem Ready em {self.connect_timeout_us / 1e6:.0f} s desde o hello",
        )

    def _on_hello_resposta(self, payload):
        if not self.initiator or self.phase != IDLE:
            return
        peer = PeerId.from_bytes(payload)
        if peer != self.remote_peer:
            self._falhar(ESTAGIO_PEER, f"resposta de {peer.short()}, esperado {self._remoto()}")
            return
        self._avancar(PEER_EXCHANGED)
        self.upgrade()

    def _on_raw(self, payload):
        if self.phase != PEER_EXCHANGED:
            logger.debug(f"{self.nome}: multistream em claro fora de fase ({self.phase})")
            return
        saida, _ = self._negociador.feed(payload)
        if saida:
            self._send(TAG_RAW, saida)
        selecionado = self._negociador.selected
        if selecionado is None:
            return
        self.state.selected_security = selecionado
        self._avancar(MULTISTREAM_AGREED)
        if selecionado != NOISE:
            self._falhar(ESTAGIO_SECURITY, f"{selecionado} sem implementação")
            return
        if self.initiator:
            self._handshake = HandshakeInitiator(self.static_key, self.ephemeral_key, expected_peer=self.remote_peer)
            self._send(TAG_HANDSHAKE, self._handshake.message1())

    def _on_handshake(self, payload):
        if self.phase != MULTISTREAM_AGREED:
            logger.debug(f"{self.nome}: handshake fora de fase ({self.phase})")
            return
        if self.initiator:
            self._secured(self._handshake.read_message2(payload))
            self._negociador = MultistreamDialer(self.muxer_proposals)
        else:
            self._handshake = HandshakeResponder(self.static_key, self.ephemeral_key, expected_peer=self.remote_peer)
            self._send(TAG_HANDSHAKE, self._handshake.read_message1(payload))
            self._secured(self._handshake.session)
            self._negociador = MultistreamListener(self.muxer_supported)
        self._send_selado(self._negociador.start())

    def _secured(self, session):
        self.session = session
        self.state.session_key = session.session_key
        self._avancar(SECURED)

    def _on_selado(self, payload):
        if self.session is None:
            logger.debug(f"{self.nome}: mensagem selada antes do handshake")
            return
        plaintext, lacuna = self.session.open(payload)
        if self.phase == SECURED:
            saida, resto = self._negociador.feed(plaintext)
            if saida:
                self._send_selado(saida)
            if self._negociador.selected is None:
                return
            self.state.selected_muxer = self._negociador.selected
            self._avancar(MUXED)
            self._iniciar_muxer()
            if resto:
                self.muxer.receive(resto)
            return
        if lacuna:
            self.muxer.on_gap()
        self.muxer.receive(plaintext)

    # muxer e streams

    def _iniciar_muxer(self):
        self.muxer = Muxer(
            self.initiator,
            self._enfileirar,
            protocols=self.handlers,
            on_stream_open=self._on_stream_open,
            on_stream_failed=self._on_stream_failed,
            on_pong=self._on_pong,
        )
        if self.pubsub_protocol is None:
            self._pronto()
        elif self.initiator:
            self.pubsub_stream = self.muxer.open_stream(self.pubsub_protocol)

    def _on_stream_open(self, stream):
        if self.phase == MUXED and stream.protocol == self.pubsub_protocol:
            self.pubsub_stream = stream
            self._pronto()
        handler = self.handlers.get(stream.protocol)
        if handler is not None:
            handler(self, stream)

    def _on_stream_failed(self, stream, exc):
        if self.phase == MUXED and stream is self.pubsub_stream:
            self._falhar(ESTAGIO_PUBSUB, exc.motivo)

    def _pronto(self):
        self.ready_at = self.clock.now_us()
        if self._timer_negociacao is not None:
            self._timer_negociacao.cancel()
            self._timer_negociacao = None
        self._avancar(READY)
        if self.initiator and self.keep_alive_us > 0:
            self._timer_keep_alive = self.clock.call_later(self.keep_alive_us, self._keep_alive)
        for callback in list(self.on_ready):
            callback(self)

    def open_stream(self, protocol_id):
        if self.phase != READY:
            raise ConnectionNotReady(f"open_stream exige {READY}, fase atual {self.phase}")
        return self.muxer.open_stream(protocol_id)

    # fila de saída

    def _enfileirar(self, quadro, etiqueta):
        if self.phase == FAILED:
            return
        self._saida.append((quadro, etiqueta))
        if self._flush_agendado is None:
            self._flush_agendado = self.clock.call_later(0, self._flush)

    def _flush(self):
        self._flush_agendado = None
        if self.phase == FAILED or self._bloqueado:
            return
        itens, self._saida = self._saida, []
        self._despachar(itens)

    def _despachar(self, itens):
        """Agrupa os quadros no menor número de mensagens seladas que cabem."""
        mensagem = bytearray()
        etiquetas = []
        for quadro, etiqueta in itens:
            raw = quadro.encode()
            if mensagem and len(mensagem) + len(raw) > MAX_SELADO_PLAINTEXT:
                self._send_selado(bytes(mensagem), tuple(etiquetas))
                mensagem, etiquetas = bytearray(), []
            mensagem += raw
            if etiqueta is not None and etiqueta not in etiquetas:
                etiquetas.append(etiqueta)
        if mensagem:
            self._send_selado(bytes(mensagem), tuple(etiquetas))

    # keep-alive

    def _keep_alive(self):
        self._timer_keep_alive = self.clock.call_later(self.keep_alive_us, self._keep_alive)
        if self.phase != READY or self._bloqueado:
            return
        self._ping_seq += 1
        self._ping_enviado_em = self.clock.now_us()
        self._despachar([(MuxFrame(STREAM_CONTROLE, PING, PING_SEQ.pack(self._ping_seq)), None)])
        self._bloqueado = True
        self._timer_pong = self.clock.call_later(self.keep_alive_timeout_us, self._pong_expirado)
        logger.info(f"{self.nome}: keep-alive {self._ping_seq} enviado para {self._remoto()}")

    def _on_pong(self, data):
        if not self._bloqueado or data != PING_SEQ.pack(self._ping_seq):
            return
        rtt = self.clock.now_us() - self._ping_enviado_em
        self.keep_alive_rtts.append(rtt)
        logger.info(f"{self.nome}: pong {self._ping_seq} de {self._remoto()} em {rtt / 1000:.1f} ms")
        if self._timer_pong is not None:
            self._timer_pong.cancel()
            self._timer_pong = None
        self._desbloquear()

    def _pong_expirado(self):
        self._timer_pong = None
        self.keep_alive_falhas += 1
        logger.warning(f"{self.nome}: keep-alive {self._ping_seq} sem resposta de {self._remoto()}")
        self._desbloquear()

    def _desbloquear(self):
        self._bloqueado = False
        if self._saida and self._flush_agendado is None:
            self._flush_agendado = self.clock.call_later(0, self._flush)


def upgrade_connection(conn):
    """
    Leva uma conexão iniciadora em PeerExchanged adiante. O estado
    devolvido chega a Ready ou Failed conforme o relógio avança.
    """
    return conn.upgrade()
