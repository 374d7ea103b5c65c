from django.test import SimpleTestCase

from p2p_host.connection import Connection, loopback_pair, upgrade_connection
from p2p_host.constants import (
    FAILED,
    FLOODSUB,
    NOISE,
    PEER_EXCHANGED,
    READY,
    SECURED,
    TAG_RAW,
    TAG_SELADO,
    TLS,
    YAMUX,
)
from p2p_host.exceptions import ConnectionNotReady
from p2p_host.multistream import decode_all
from p2p_host.peer_id import PeerId, generate_static_key
from sim_network.simulator import Simulator

ECO = "/eco/1.0.0"
SEGUNDO = 1_000_000


def ignorar(conn, stream):
    return None


def eco(conn, stream):
    stream.on_data = lambda data: stream.write(data)


class SetupData:
    def criar_par(self, opcoes_i=None, opcoes_r=None, handlers_r=None):
        self.sim = Simulator()
        self.canal_i, self.canal_r = loopback_pair(self.sim, delay_us=1000)
        self.chave_i = generate_static_key()
        self.chave_r = generate_static_key()
        self.i = Connection(
            True,
            self.sim,
            self.canal_i,
            self.chave_i,
            remote_peer=PeerId.from_public_key(self.chave_r),
            handlers={FLOODSUB: ignorar},
            keep_alive_s=0,
            **(opcoes_i or {}),
        )
        self.r = Connection(
            False,
            self.sim,
            self.canal_r,
            self.chave_r,
            handlers=handlers_r if handlers_r is not None else {FLOODSUB: ignorar, ECO: eco},
            keep_alive_s=0,
            **(opcoes_r or {}),
        )
        self.canal_i.destino = self.r
        self.canal_r.destino = self.i
        return self.i, self.r

    def conectar(self, ate_s=1):
        self.i.start()
        self.sim.run_until(self.sim.now_us() + ate_s * SEGUNDO)

    @property
    def transcricao(self):
        return self.canal_i.transcript


class UpgradeConnectionTestCase(SetupData, SimpleTestCase):
    def test_noise_e_yamux_chegam_a_ready(self):
        i, r = self.criar_par()
        self.conectar()
        for conn in (i, r):
            self.assertEqual(conn.phase, READY)
            self.assertEqual(conn.state.selected_security, NOISE)
            self.assertEqual(conn.state.selected_muxer, YAMUX)
        self.assertEqual(i.state.session_key, r.state.session_key)
        self.assertEqual(r.remote_peer, i.local_peer)
        self.assertEqual(i.pubsub_stream.protocol, FLOODSUB)

    def test_transcricao_em_claro_recusa_tls(self):
        self.criar_par()
        self.conectar()
        em_claro = [(lado, decode_all(raw)) for lado, tag, raw in self.transcricao if tag == TAG_RAW]
        self.assertEqual(
            em_claro,
            [
                ("R", ["/multistream/1.0.0"]),
                ("I", ["/multistream/1.0.0", TLS]),
                ("R", ["na"]),
                ("I", [NOISE]),
                ("R", [NOISE]),
            ],
        )

    def test_yamux_nunca_em_claro(self):
        self.criar_par()
        self.conectar()
        self.assertTrue(any(tag == TAG_SELADO for _, tag, _ in self.transcricao))
        for _, _, raw in self.transcricao:
            self.assertNotIn(b"/yamux", raw)
            self.assertNotIn(b"/floodsub", raw)

    def test_seguranca_recusada(self):
        i, r = self.criar_par(opcoes_r={"security_supported": ()})
        self.conectar()
        self.assertEqual(i.phase, FAILED)
        self.assertEqual(i.state.failed_stage, "security")

    def test_tls_acordado_sem_implementacao(self):
        i, r = self.criar_par(opcoes_r={"security_supported": (TLS,)})
        self.conectar()
        self.assertEqual(i.state.failed_stage, "security")
        self.assertEqual(r.state.failed_stage, "security")

    def test_muxer_recusado(self):
        i, r = self.criar_par(opcoes_r={"muxer_supported": ("/mplex/6.7.0",)})
        self.conectar()
        self.assertEqual(i.state.failed_stage, "muxer")

    def test_respondedor_falha_em_security_pelo_prazo(self):
        i, r = self.criar_par(opcoes_i={"security_proposals": ("/quic/1.0.0",)}, opcoes_r={"connect_timeout_s": 5})
        self.conectar()
        self.assertEqual(i.state.failed_stage, "security")
        self.assertEqual(r.phase, PEER_EXCHANGED)
        self.sim.run_until(6 * SEGUNDO)
        self.assertEqual(r.phase, FAILED)
        self.assertEqual(r.state.failed_stage, "security")

    def test_respondedor_falha_em_muxer_pelo_prazo(self):
        i, r = self.criar_par(opcoes_i={"muxer_proposals": ("/mplex/6.7.0",)}, opcoes_r={"connect_timeout_s": 5})
        self.conectar()
        self.assertEqual(i.state.failed_stage, "muxer")
        self.assertEqual(r.phase, SECURED)
        self.sim.run_until(6 * SEGUNDO)
        self.assertEqual(r.state.failed_stage, "muxer")

    def test_prazo_do_respondedor_cancelado_no_ready(self):
        i, r = self.criar_par(opcoes_r={"connect_timeout_s": 5})
        self.conectar()
        self.sim.run_until(60 * SEGUNDO)
        self.assertEqual(r.phase, READY)
        self.assertIsNone(r._timer_negociacao)

    def test_pubsub_recusado(self):
        i, r = self.criar_par(handlers_r={})
        self.conectar()
        self.assertEqual(i.state.failed_stage, "pubsub")

    def test_msg2_adulterada_falha_no_handshake(self):
        i, r = self.criar_par()

        def trocar_msg2(tag, payload):
            return bytes(len(payload)) if tag == b"H" else payload

        self.canal_r.adulterar = trocar_msg2
        self.conectar()
        self.assertEqual(i.state.failed_stage, "handshake")

    def test_upgrade_fora_de_fase(self):
        i, r = self.criar_par()
        with self.assertRaises(ConnectionNotReady):
            upgrade_connection(i)

    def test_upgrade_explicito(self):
        i, r = self.criar_par()
        i.state.phase = PEER_EXCHANGED
        r.receive(b"P", i.local_peer.to_bytes())
        estado = upgrade_connection(i)
        self.sim.run_until(SEGUNDO)
        self.assertIs(estado, i.state)
        self.assertEqual(estado.phase, READY)


class ConexaoProntaTestCase(SetupData, SimpleTestCase):
    def setUp(self):
        self.criar_par()
        self.conectar()

    def test_byte_selado_adulterado(self):
        self.canal_i.adulterar = lambda tag, payload: payload[:-1] + bytes([payload[-1] ^ 1])
        self.i.pubsub_stream.write(b"qualquer coisa")
        self.sim.run_until(self.sim.now_us() + SEGUNDO)
        self.assertEqual(self.r.phase, FAILED)
        self.assertEqual(self.r.state.failed_stage, "secure_channel")

    def test_streams_concorrentes(self):
        a = self.i.open_stream(ECO)
        b = self.i.open_stream(ECO)
        a.write(b"primeiro-a")
        b.write(b"primeiro-b")
        a.write(b"segundo-a")
        self.sim.run_until(self.sim.now_us() + SEGUNDO)
        self.assertEqual(a.recebido, [b"primeiro-a", b"segundo-a"])
        self.assertEqual(b.recebido, [b"primeiro-b"])

    def test_cem_streams_com_ids_crescentes(self):
        ids = [self.i.open_stream(ECO).id for _ in range(100)]
        self.assertTrue(all(x < y for x, y in zip(ids, ids[1:])))
        self.assertTrue(all(x % 2 == 1 for x in ids))

    def test_abrir_stream_em_conexao_falha(self):
        self.i.close("teste")
        self.assertEqual(self.i.state.failed_stage, "closed")
        with self.assertRaises(ConnectionNotReady):
            self.i.open_stream(ECO)

    def test_quadros_de_um_turno_agrupados(self):
        antes = self.i.enviados[TAG_SELADO]
        for n in range(10):
            self.i.pubsub_stream.write(b"x" * 50)
        self.sim.run_until(self.sim.now_us() + SEGUNDO)
        self.assertEqual(self.i.enviados[TAG_SELADO] - antes, 1)


class KeepAliveTestCase(SetupData, SimpleTestCase):
    def test_ping_mede_rtt_e_libera_a_fila(self):
        i, r = self.criar_par(opcoes_i={"keep_alive_timeout_s": 5})
        i.keep_alive_us = SEGUNDO
        self.conectar(ate_s=0.5)
        self.sim.run_until(i.ready_at + SEGUNDO)
        self.assertTrue(i.bloqueada)
        i.pubsub_stream.write(b"durante o ping")
        self.sim.run_until(i.ready_at + SEGUNDO + 10_000)
        self.assertFalse(i.bloqueada)
        self.assertEqual(i.keep_alive_rtts, [2_000])
        self.assertEqual(r.keep_alive_rtts, [])

    def test_pong_perdido_desbloqueia_sem_falhar(self):
        i, r = self.criar_par(opcoes_i={"keep_alive_timeout_s": 1.5})
        i.keep_alive_us = SEGUNDO
        self.conectar(ate_s=0.5)
        self.canal_r.adulterar = lambda tag, payload: None if tag == TAG_SELADO else payload
        self.sim.run_until(i.ready_at + 2_700_000)
        self.assertEqual(i.keep_alive_falhas, 1)
        self.assertFalse(i.bloqueada)
        self.assertEqual(i.phase, READY)

    def test_zero_desliga(self):
        i, r = self.criar_par()
        self.conectar(ate_s=60)
        self.assertEqual(i.keep_alive_rtts, [])
        self.assertIsNone(i._timer_keep_alive)
