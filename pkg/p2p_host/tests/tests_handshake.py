import os

from django.test import SimpleTestCase

from p2p_host.exceptions import HandshakeError, SecureChannelError
from p2p_host.handshake import (
    MSG2_LEN,
    HandshakeInitiator,
    HandshakeResponder,
    handshake,
)
from p2p_host.peer_id import PeerId, generate_static_key


class SetupData:
    def setUp(self):
        self.chave_i = generate_static_key()
        self.chave_r = generate_static_key()


class HandshakeTestCase(SetupData, SimpleTestCase):
    def test_segredos_iguais(self):
        sessao_i, sessao_r = handshake(self.chave_i, self.chave_r)
        self.assertEqual(sessao_i.session_key, sessao_r.session_key)
        self.assertEqual(sessao_i.chave_envio, sessao_r.chave_recepcao)
        self.assertEqual(sessao_i.remote_peer, PeerId.from_public_key(self.chave_r))
        self.assertEqual(sessao_r.remote_peer, PeerId.from_public_key(self.chave_i))

    def test_msg2_aleatoria_falha(self):
        iniciador = HandshakeInitiator(self.chave_i)
        iniciador.message1()
        with self.assertRaises(HandshakeError):
            iniciador.read_message2(os.urandom(MSG2_LEN))

    def test_msg2_de_tamanho_errado(self):
        iniciador = HandshakeInitiator(self.chave_i)
        iniciador.message1()
        with self.assertRaises(HandshakeError):
            iniciador.read_message2(b"\x00" * 10)

    def test_replay_contra_efemera_nova(self):
        primeiro = HandshakeInitiator(self.chave_i)
        msg2_antiga = HandshakeResponder(self.chave_r).read_message1(primeiro.message1())
        novo = HandshakeInitiator(self.chave_i)
        novo.message1()
        with self.assertRaises(HandshakeError):
            novo.read_message2(msg2_antiga)

    def test_identidade_inesperada(self):
        outro = generate_static_key()
        iniciador = HandshakeInitiator(self.chave_i, expected_peer=PeerId.from_public_key(outro))
        msg2 = HandshakeResponder(self.chave_r).read_message1(iniciador.message1())
        with self.assertRaises(HandshakeError):
            iniciador.read_message2(msg2)

    def test_msg2_antes_de_msg1(self):
        with self.assertRaises(HandshakeError):
            HandshakeInitiator(self.chave_i).read_message2(b"\x00" * MSG2_LEN)


class SecureSessionTestCase(SetupData, SimpleTestCase):
    def setUp(self):
        super().setUp()
        self.i, self.r = handshake(self.chave_i, self.chave_r)

    def test_ida_e_volta(self):
        self.assertEqual(self.r.open(self.i.seal(b"ola")), (b"ola", 0))
        self.assertEqual(self.i.open(self.r.seal(b"oi")), (b"oi", 0))

    def test_byte_adulterado(self):
        selado = bytearray(self.i.seal(b"conteudo"))
        selado[-1] ^= 0x01
        with self.assertRaises(SecureChannelError):
            self.r.open(bytes(selado))

    def test_replay_rejeitado(self):
        selado = self.i.seal(b"uma vez")
        self.r.open(selado)
        with self.assertRaises(SecureChannelError):
            self.r.open(selado)

    def test_lacuna_contada(self):
        self.i.seal(b"perdida")
        _, lacuna = self.r.open(self.i.seal(b"chegou"))
        self.assertEqual(lacuna, 1)
        self.assertEqual(self.r.lacunas, 1)

    def test_curta_demais(self):
        with self.assertRaises(SecureChannelError):
            self.r.open(b"\x00" * 10)
