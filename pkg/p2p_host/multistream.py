"""
Negociação multistream-select.

Cada mensagem é ``uvarint(len(id) + 1) || id || "\\n"``. Os dois lados
enviam o cabeçalho ``/multistream/1.0.0`` sem esperar o outro; o
dialer encadeia a primeira proposta logo após o cabeçalho. O listener
ecoa o id aceito ou responde ``na``; o dialer passa à próxima proposta
a cada ``na``.
"""
import logging
from dataclasses import dataclass, field

from dados_comuns.utils import VarintIncompleto, decode_uvarint, encode_uvarint
from p2p_host.constants import MULTISTREAM, NA
from p2p_host.exceptions import MultistreamEncodingError, NegotiationError

logger = logging.getLogger(__name__)

INICIADOR = "I"
RESPONDEDOR = "R"

# prefixo publicado para o cabeçalho; só para reproduzir transcrições antigas
CABECALHO_LITERAL = b"\x03" + MULTISTREAM.encode("utf-8") + b"\n"

MOTIVO_CABECALHO = "header"
MOTIVO_SEM_PROTOCOLO = "no-common-protocol"
MOTIVO_INESPERADO = "unexpected"


def multistream_encode(protocol_id, cabecalho_legado=False):
    if not protocol_id or "\n" in protocol_id:
        raise MultistreamEncodingError(f"identificador de protocolo inválido: {protocol_id!r}")
    if cabecalho_legado and protocol_id == MULTISTREAM:
        return CABECALHO_LITERAL
    corpo = protocol_id.encode("utf-8") + b"\n"
    return encode_uvarint(len(corpo)) + corpo


class MultistreamDecoder:
    def __init__(self):
        self._buf = bytearray()

    def feed(self, data):
        self._buf += data

    def next(self):
        """Próximo id completo do buffer ou None se ainda faltam bytes."""
        try:
            tamanho, inicio = decode_uvarint(self._buf)
        except VarintIncompleto:
            return None
        except ValueError as exc:
            raise MultistreamEncodingError(str(exc)) from exc
        if tamanho == 0:
            raise MultistreamEncodingError("mensagem multistream vazia")
        fim = inicio + tamanho
        if len(self._buf) < fim:
            return None
        corpo = bytes(self._buf[inicio:fim])
        del self._buf[:fim]
        if not corpo.endswith(b"\n"):
            raise MultistreamEncodingError(f"mensagem sem quebra de linha final: {corpo!r}")
        try:
            return corpo[:-1].decode("utf-8")
        except UnicodeDecodeError as exc:
            raise MultistreamEncodingError(str(exc)) from exc

    def take_rest(self):
        resto = bytes(self._buf)
        self._buf.clear()
        return resto


def decode_all(data):
    decoder = MultistreamDecoder()
    decoder.feed(data)
    ids = []
    while (pid := decoder.next()) is not None:
        ids.append(pid)
    if decoder.take_rest():
        raise MultistreamEncodingError("bytes sobrando após a última mensagem")
    return ids


class _Negociador:
    def __init__(self, cabecalho_legado=False):
        self.selected = None
        self.falha = None
        self._cabecalho_ok = False
        self._decoder = MultistreamDecoder()
        self._cabecalho_legado = cabecalho_legado

    @property
    def done(self):
        return self.selected is not None or self.falha is not None

    def _cabecalho(self):
        return multistream_encode(MULTISTREAM, cabecalho_legado=self._cabecalho_legado)

    def _falhar(self, motivo):
        self.falha = motivo
        raise NegotiationError(motivo)

    def _verificar_cabecalho(self, protocol_id):
        if protocol_id != MULTISTREAM:
            self._falhar(MOTIVO_CABECALHO)
        self._cabecalho_ok = True

    def feed(self, data):
        """
        Consome bytes do outro lado. Retorna ``(saida, resto)``: bytes a
        enviar em resposta e bytes que sobraram após o acordo.
        """
        if self.falha is not None:
            raise NegotiationError(self.falha)
        self._decoder.feed(data)
        saida = bytearray()
        while self.selected is None:
            protocol_id = self._decoder.next()
            if protocol_id is None:
                break
            saida += self.receive(protocol_id)
        resto = self._decoder.take_rest() if self.selected is not None else b""
        return bytes(saida), resto


class MultistreamDialer(_Negociador):
    def __init__(self, proposals, cabecalho_legado=False):
        super().__init__(cabecalho_legado)
        if not proposals:
            raise MultistreamEncodingError("lista de propostas vazia")
        self.proposals = list(proposals)
        self._indice = 0

    @property
    def proposta_atual(self):
        return self.proposals[self._indice]

    def start(self):
        return self._cabecalho() + multistream_encode(self.proposta_atual)

    def receive(self, protocol_id):
        if not self._cabecalho_ok:
            self._verificar_cabecalho(protocol_id)
            return b""
        if protocol_id == NA:
            logger.debug(f"proposta {self.proposta_atual} recusada")
            self._indice += 1
            if self._indice >= len(self.proposals):
                self._falhar(MOTIVO_SEM_PROTOCOLO)
            return multistream_encode(self.proposta_atual)
        if protocol_id != self.proposta_atual:
            self._falhar(MOTIVO_INESPERADO)
        self.selected = protocol_id
        return b""


class MultistreamListener(_Negociador):
    def __init__(self, supported, cabecalho_legado=False):
        super().__init__(cabecalho_legado)
        self.supported = tuple(supported)

    def start(self):
        return self._cabecalho()

    def receive(self, protocol_id):
        if not self._cabecalho_ok:
            self._verificar_cabecalho(protocol_id)
            return b""
        if protocol_id in self.supported:
            self.selected = protocol_id
            return multistream_encode(protocol_id)
        return multistream_encode(NA)


@dataclass
class NegotiationResult:
    selected: str = None
    falha: str = None
    transcript: list = field(default_factory=list)

    @property
    def ok(self):
        return self.selected is not None

    def wire_bytes(self, lado=None):
        return b"".join(raw for quem, _, raw in self.transcript if lado is None or quem == lado)


def _registrar(transcript, lado, data):
    for protocol_id in decode_all(data):
        transcript.append((lado, protocol_id, multistream_encode(protocol_id)))


def negotiate(initiator_proposals, responder_supported):
    """
    Negociação completa em loopback. A transcrição registra as mensagens
    na ordem em que cada lado as emite.
    """
    dialer = MultistreamDialer(initiator_proposals)
    listener = MultistreamListener(responder_supported)
    resultado = NegotiationResult()
    para_listener = dialer.start()
    para_dialer = listener.start()
    _registrar(resultado.transcript, INICIADOR, para_listener)
    _registrar(resultado.transcript, RESPONDEDOR, para_dialer)
    try:
        while para_listener or para_dialer:
            resposta = listener.feed(para_listener)[0] if para_listener else b""
            _registrar(resultado.transcript, RESPONDEDOR, resposta)
            para_dialer += resposta
            para_listener = dialer.feed(para_dialer)[0] if para_dialer else b""
            _registrar(resultado.transcript, INICIADOR, para_listener)
            para_dialer = b""
            if dialer.done:
                break
    except NegotiationError as exc:
        resultado.falha = exc.motivo
        return resultado
    resultado.selected = dialer.selected
    return resultado
