import numpy as np
from django.test import SimpleTestCase, tag

from p2p_host.exceptions import UnknownPeerError
from p2p_host.peer_id import PeerId, generate_static_key, public_bytes
from p2p_host.routing import RoutingTable


class PeerIdTestCase(SimpleTestCase):
    def test_formato(self):
        peer = PeerId.from_public_key(generate_static_key())
        self.assertEqual(len(peer.id), 52)
        self.assertEqual(peer.id, peer.id.lower())
        self.assertNotIn("=", peer.id)

    def test_estavel_para_a_mesma_chave(self):
        chave = generate_static_key(np.random.default_rng(4))
        outra = generate_static_key(np.random.default_rng(4))
        self.assertEqual(public_bytes(chave), public_bytes(outra))
        self.assertEqual(PeerId.from_public_key(chave), PeerId.from_public_key(public_bytes(outra)))

    def test_bytes_ida_e_volta(self):
        peer = PeerId.from_public_key(generate_static_key())
        self.assertEqual(PeerId.from_bytes(peer.to_bytes()), peer)
        self.assertEqual(peer.short(), peer.id[:8])

    @tag("lento")
    def test_sem_colisoes_em_10_mil_chaves(self):
        rng = np.random.default_rng(99)
        ids = {PeerId.from_public_key(generate_static_key(rng)) for _ in range(10_000)}
        self.assertEqual(len(ids), 10_000)


class RoutingTableTestCase(SimpleTestCase):
    def setUp(self):
        self.tabela = RoutingTable()
        self.a = PeerId("a" * 52)
        self.b = PeerId("b" * 52)

    def test_novo_e_atualizacao(self):
        self.assertTrue(self.tabela.update(self.a, 0x0027, 10))
        self.assertFalse(self.tabela.update(self.a, 0x0027, 20))
        self.assertEqual(self.tabela.entries[self.a].learned_at, 20)
        self.assertEqual(len(self.tabela), 1)

    def test_um_endereco_por_peer(self):
        self.tabela.update(self.a, 0x0027, 10)
        self.tabela.update(self.b, 0x0027, 20)
        self.assertNotIn(self.a, self.tabela)
        self.assertEqual(self.tabela.peer_for(0x0027), self.b)

    def test_lookup_desconhecido(self):
        with self.assertRaises(UnknownPeerError):
            self.tabela.lookup(self.a)

    def test_remove_e_clear(self):
        self.tabela.update(self.a, 0x0027, 10)
        self.tabela.update(self.b, 0x0023, 10)
        self.assertEqual(self.tabela.peers(), [self.a, self.b])
        self.tabela.remove(self.a)
        self.assertEqual(self.tabela.lookup(self.b), 0x0023)
        self.tabela.clear()
        self.assertEqual(len(self.tabela), 0)
