"""
Handshake autenticado e canal selado.

msg1 (iniciador -> respondedor): e_i || s_i
msg2 (respondedor -> iniciador): e_r || s_r || nonce || AEAD(k_r2i, "handshake-ok", ad=h)

h = SHA-256(msg1 || e_r || s_r). As chaves de cada sentido saem do
HKDF-SHA256 sobre DH(e_i, e_r) || DH(e_i, s_r) || DH(s_i, e_r) com sal h.
"""
import hashlib
import logging
import struct

from cryptography.exceptions import InvalidTag
from cryptography.hazmat.primitives import hashes
from cryptography.hazmat.primitives.asymmetric import x25519
from cryptography.hazmat.primitives.ciphers.aead import ChaCha20Poly1305
from cryptography.hazmat.primitives.kdf.hkdf import HKDF

from p2p_host.constants import NONCE_LEN, TAG_AEAD_LEN
from p2p_host.exceptions import HandshakeError, SecureChannelError
from p2p_host.peer_id import PeerId, generate_static_key, public_bytes

logger = logging.getLogger(__name__)

KEY_LEN = 32
INFO = b"oec/handshake/v1"
HANDSHAKE_OK = b"handshake-ok"
MSG1_LEN = 2 * KEY_LEN
MSG2_LEN = 2 * KEY_LEN + NONCE_LEN + len(HANDSHAKE_OK) + TAG_AEAD_LEN

NONCE = struct.Struct(">Q")


def _nonce_aead(contador):
    return b"\x00" * 4 + NONCE.pack(contador)


def _derivar(material, transcript_hash):
    okm = HKDF(
        algorithm=hashes.SHA256(),
        length=2 * KEY_LEN,
        salt=transcript_hash,
        info=INFO,
    ).derive(material)
    return okm[:KEY_LEN], okm[KEY_LEN:]


def _chave_publica(raw):
    try:
        return x25519.X25519PublicKey.from_public_bytes(bytes(raw))
    except ValueError as exc:
        raise HandshakeError(f"chave pública inválida: {exc}") from exc


class SecureSession:
    """
    Canal selado com ChaCha20-Poly1305. Cada mensagem leva o contador de
    8 bytes em claro; contadores repetidos ou menores são rejeitados e
    saltos são aceitos e contados em ``lacunas``.
    """

    def __init__(self, chave_envio, chave_recepcao, remote_peer=None):
        self.chave_envio = chave_envio
        self.chave_recepcao = chave_recepcao
        self.remote_peer = remote_peer
        self._envio = ChaCha20Poly1305(chave_envio)
        self._recepcao = ChaCha20Poly1305(chave_recepcao)
        self._proximo_nonce = 0
        self._ultimo_recebido = -1
        self.lacunas = 0

    @property
    def session_key(self):
        """Identificador comum às duas pontas, independente do sentido."""
        par = sorted((self.chave_envio, self.chave_recepcao))
        return hashlib.sha256(par[0] + par[1]).digest()

    def seal(self, plaintext):
        contador = self._proximo_nonce
        self._proximo_nonce += 1
        return NONCE.pack(contador) + self._envio.encrypt(_nonce_aead(contador), bytes(plaintext), None)

    def open(self, data):
        """Retorna ``(plaintext, lacuna)``; lacuna é o número de mensagens puladas."""
        if len(data) < NONCE_LEN + TAG_AEAD_LEN:
            raise SecureChannelError(f"mensagem selada curta demais ({len(data)} bytes)")
        (contador,) = NONCE.unpack_from(data)
        if contador <= self._ultimo_recebido:
            raise SecureChannelError(f"contador {contador} repetido (último {self._ultimo_recebido})")
        try:
            plaintext = self._recepcao.decrypt(_nonce_aead(contador), bytes(data[NONCE_LEN:]), None)
        except InvalidTag as exc:
            raise SecureChannelError("falha de autenticação da mensagem selada") from exc
        lacuna = contador - self._ultimo_recebido - 1
        self._ultimo_recebido = contador
        if lacuna:
            self.lacunas += lacuna
            logger.info(f"{lacuna} mensagem(ns) selada(s) não recebida(s) antes do contador {contador}")
        return plaintext, lacuna


class HandshakeInitiator:
    def __init__(self, static_key, ephemeral_key=None, expected_peer=None):
        self.static_key = static_key
        self.ephemeral_key = ephemeral_key or generate_static_key()
        self.expected_peer = expected_peer
        self._msg1 = None

    def message1(self):
        self._msg1 = public_bytes(self.ephemeral_key) + public_bytes(self.static_key)
        return self._msg1

    def read_message2(self, msg):
        if self._msg1 is None:
            raise HandshakeError("msg2 recebida antes do envio de msg1")
        msg = bytes(msg)
        if len(msg) != MSG2_LEN:
            raise HandshakeError(f"msg2 com {len(msg)} bytes, esperado {MSG2_LEN}")
        e_r_raw, s_r_raw = msg[:KEY_LEN], msg[KEY_LEN:2 * KEY_LEN]
        nonce = msg[2 * KEY_LEN:2 * KEY_LEN + NONCE_LEN]
        selado = msg[2 * KEY_LEN + NONCE_LEN:]
        remote = PeerId.from_public_key(s_r_raw)
        if self.expected_peer is not None and remote != self.expected_peer:
            raise HandshakeError(f"chave estática do respondedor não corresponde a {self.expected_peer}")
        e_r, s_r = _chave_publica(e_r_raw), _chave_publica(s_r_raw)
        material = (
            self.ephemeral_key.exchange(e_r)
            + self.ephemeral_key.exchange(s_r)
            + self.static_key.exchange(e_r)
        )
        transcript_hash = hashlib.sha256(self._msg1 + e_r_raw + s_r_raw).digest()
        k_i2r, k_r2i = _derivar(material, transcript_hash)
        (contador,) = NONCE.unpack(nonce)
        try:
            confirmacao = ChaCha20Poly1305(k_r2i).decrypt(_nonce_aead(contador), selado, transcript_hash)
        except InvalidTag as exc:
            raise HandshakeError("confirmação do handshake não autenticou") from exc
        if confirmacao != HANDSHAKE_OK:
            raise HandshakeError("confirmação do handshake inesperada")
        return SecureSession(k_i2r, k_r2i, remote_peer=remote)


class HandshakeResponder:
    def __init__(self, static_key, ephemeral_key=None, expected_peer=None):
        self.static_key = static_key
        self.ephemeral_key = ephemeral_key or generate_static_key()
        self.expected_peer = expected_peer
        self.session = None

    def read_message1(self, msg):
        """Processa msg1 e retorna msg2; a sessão fica em ``self.session``."""
        if len(msg) != MSG1_LEN:
            raise HandshakeError(f"msg1 com {len(msg)} bytes, esperado {MSG1_LEN}")
        e_i_raw, s_i_raw = bytes(msg[:KEY_LEN]), bytes(msg[KEY_LEN:])
        remote = PeerId.from_public_key(s_i_raw)
        if self.expected_peer is not None and remote != self.expected_peer:
            raise HandshakeError(f"chave estática do iniciador não corresponde a {self.expected_peer}")
        e_i, s_i = _chave_publica(e_i_raw), _chave_publica(s_i_raw)
        e_r_raw, s_r_raw = public_bytes(self.ephemeral_key), public_bytes(self.static_key)
        material = (
            self.ephemeral_key.exchange(e_i)
            + self.static_key.exchange(e_i)
            + self.ephemeral_key.exchange(s_i)
        )
        transcript_hash = hashlib.sha256(bytes(msg) + e_r_raw + s_r_raw).digest()
        k_i2r, k_r2i = _derivar(material, transcript_hash)
        confirmacao = ChaCha20Poly1305(k_r2i).encrypt(_nonce_aead(0), HANDSHAKE_OK, transcript_hash)
        self.session = SecureSession(k_r2i, k_i2r, remote_peer=remote)
        return e_r_raw + s_r_raw + NONCE.pack(0) + confirmacao


def handshake(initiator_static_key, responder_static_key, rng=None):
    """Handshake em loopback; retorna as sessões ``(iniciador, respondedor)``."""
    efemera_i = generate_static_key(rng)
    efemera_r = generate_static_key(rng)
    iniciador = HandshakeInitiator(
        initiator_static_key,
        efemera_i,
        expected_peer=PeerId.from_public_key(responder_static_key),
    )
    respondedor = HandshakeResponder(
        responder_static_key,
        efemera_r,
        expected_peer=PeerId.from_public_key(initiator_static_key),
    )
    msg2 = respondedor.read_message1(iniciador.message1())
    sessao_i = iniciador.read_message2(msg2)
    if sessao_i.session_key != respondedor.session.session_key:
        raise HandshakeError("segredos de sessão divergentes")
    return sessao_i, respondedor.session
