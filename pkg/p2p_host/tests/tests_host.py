import threading

from django.test import SimpleTestCase

from bridge.bridge import Bridge
from bridge.ports import memory_pipe
from mesh_transport.config import MeshConfig
from mesh_transport.network import MeshClient, MeshNetwork
from mesh_transport.serial_adapter import MeshSerialAdapter
from p2p_host.constants import ESTAGIO_CONNECT, FAILED, FLOODSUB, NOISE, READY, YAMUX
from p2p_host.exceptions import UnknownPeerError
from p2p_host.host import Host
from p2p_host.peer_id import PeerId, generate_static_key
from sim_network.links import LinkModel
from sim_network.rng import node_rng
from sim_network.simulator import Simulator
from sim_network.topology import Topology

GRUPO = 0xC000
SEGUNDO = 1_000_000


class SetupData:
    def criar_hosts(self, nomes, seed=7, **opcoes):
        self.sim = Simulator()
        link = LinkModel(base_latency_ms=5, jitter_ms=0, loss_p=0.0, max_range_m=100)
        posicoes = {nome: (3 * k, 0) for k, nome in enumerate(nomes)}
        enlaces = {(a, b): link for i, a in enumerate(nomes) for b in nomes[i + 1:]}
        self.rede = MeshNetwork(self.sim, Topology(posicoes, enlaces), MeshConfig())
        opcoes.setdefault("connect_timeout_s", 60)
        opcoes.setdefault("connect_retries", 0)
        self.clientes = {}
        self.hosts = {}
        for k, nome in enumerate(nomes):
            rng = node_rng(seed, nome)
            cliente = MeshClient(self.rede, nome, rng)
            self.rede.provision(cliente, 0x0020 + k, [GRUPO])
            porta_host, porta_dispositivo = memory_pipe(self.sim, 115200)
            MeshSerialAdapter(cliente, porta_dispositivo)
            bridge = Bridge(porta_host, self.sim, inter_segment_delay_ms=60, reassembly_timeout_ms=10_000, nome=nome)
            host = Host(nome, self.sim, bridge, rng=rng, keep_alive_s=0, **opcoes)
            host.set_stream_handler(FLOODSUB, lambda conn, stream: None)
            self.clientes[nome] = cliente
            self.hosts[nome] = host
        return self.hosts

    def avancar(self, segundos):
        self.sim.run_until(self.sim.now_us() + int(segundos * SEGUNDO))

    def iniciar(self, descoberta_s=30):
        for host in self.hosts.values():
            host.start()
        self.avancar(descoberta_s)


class DescobertaTestCase(SetupData, SimpleTestCase):
    def test_tres_nos_convergem(self):
        hosts = self.criar_hosts(["a", "b", "c"])
        self.iniciar()
        for nome, host in hosts.items():
            outros = [h for n, h in hosts.items() if n != nome]
            self.assertEqual(len(host.routing), 2)
            for outro in outros:
                self.assertEqual(host.routing.lookup(outro.peer_id), self.clientes[outro.nome].unicast)

    def test_peer_desconhecido(self):
        hosts = self.criar_hosts(["a", "b"])
        estranho = PeerId.from_public_key(generate_static_key())
        with self.assertRaises(UnknownPeerError):
            hosts["a"].connect_to_peer(estranho)

    def test_callback_de_descoberta(self):
        hosts = self.criar_hosts(["a", "b"])
        descobertos = []
        hosts["a"].on_peer_discovered.append(lambda peer, endereco: descobertos.append((peer, endereco)))
        self.iniciar()
        self.assertIn((hosts["b"].peer_id, 0x0021), descobertos)

    def test_stop_limpa_tabela(self):
        hosts = self.criar_hosts(["a", "b"])
        self.iniciar()
        hosts["a"].stop()
        self.assertEqual(len(hosts["a"].routing), 0)
        self.assertFalse(hosts["a"].ativo)


class ConexaoTestCase(SetupData, SimpleTestCase):
    def test_dois_nos_chegam_a_ready(self):
        hosts = self.criar_hosts(["a", "b"])
        self.iniciar()
        a, b = hosts["a"], hosts["b"]
        conn = a.connect_to_peer(b.peer_id)
        self.avancar(120)
        self.assertEqual(conn.phase, READY)
        self.assertTrue(conn.initiator)
        self.assertEqual(conn.state.selected_security, NOISE)
        self.assertEqual(conn.state.selected_muxer, YAMUX)
        remota = b.connection(a.peer_id)
        self.assertEqual(remota.phase, READY)
        self.assertFalse(remota.initiator)
        self.assertEqual(conn.state.session_key, remota.state.session_key)
        self.assertEqual(a.ready_connections(), [conn])

    def test_connect_devolve_conexao_existente(self):
        hosts = self.criar_hosts(["a", "b"])
        self.iniciar()
        a, b = hosts["a"], hosts["b"]
        conn = a.connect_to_peer(b.peer_id)
        self.assertIs(a.connect_to_peer(b.peer_id), conn)

    def test_peer_que_saiu_termina_em_connect(self):
        hosts = self.criar_hosts(["a", "b"], connect_timeout_s=5, connect_retries=1)
        self.iniciar()
        a, b = hosts["a"], hosts["b"]
        falhas = []
        a.on_connection_failed.append(falhas.append)
        self.clientes["b"].set_online(False)
        a.connect_to_peer(b.peer_id)
        self.avancar(6)
        self.assertNotEqual(a.connection(b.peer_id).phase, FAILED)
        self.avancar(5)
        conn = a.connection(b.peer_id)
        self.assertEqual(conn.phase, FAILED)
        self.assertEqual(conn.state.failed_stage, ESTAGIO_CONNECT)
        self.assertEqual(falhas, [conn])

    def test_abertura_simultanea(self):
        hosts = self.criar_hosts(["a", "b"])
        self.iniciar()
        a, b = hosts["a"], hosts["b"]
        a.connect_to_peer(b.peer_id)
        b.connect_to_peer(a.peer_id)
        self.avancar(120)
        menor, maior = sorted([a, b], key=lambda h: h.peer_id)
        conn_menor = menor.connection(maior.peer_id)
        conn_maior = maior.connection(menor.peer_id)
        self.assertTrue(conn_menor.initiator)
        self.assertFalse(conn_maior.initiator)
        self.assertEqual(conn_menor.phase, READY)
        self.assertEqual(conn_maior.phase, READY)

    def test_reinicio_do_peer_reconecta(self):
        hosts = self.criar_hosts(["a", "b"])
        self.iniciar()
        a, b = hosts["a"], hosts["b"]
        a.auto_connect.add(b.peer_id)
        primeira = a.connect_to_peer(b.peer_id)
        self.avancar(120)
        self.assertEqual(primeira.phase, READY)
        b.stop()
        b.start()
        self.avancar(120)
        segunda = a.connection(b.peer_id)
        self.assertIsNot(segunda, primeira)
        self.assertEqual(primeira.phase, FAILED)
        self.assertEqual(segunda.phase, READY)
        self.assertEqual(b.connection(a.peer_id).phase, READY)

    def test_stream_em_conexao_pronta(self):
        hosts = self.criar_hosts(["a", "b"])
        recebidos = []

        def coletar(conn, stream):
            stream.on_data = recebidos.append

        hosts["b"].set_stream_handler("/coleta/1.0.0", coletar)
        self.iniciar()
        a, b = hosts["a"], hosts["b"]
        a.connect_to_peer(b.peer_id)
        self.avancar(120)
        stream = a.open_stream(b.peer_id, "/coleta/1.0.0")
        stream.write(b"ola mesh")
        self.avancar(60)
        self.assertEqual(recebidos, [b"ola mesh"])


class SubmitTestCase(SetupData, SimpleTestCase):
    def test_connect_vindo_de_outra_thread(self):
        hosts = self.criar_hosts(["a", "b"])
        self.iniciar()
        a, b = hosts["a"], hosts["b"]
        thread = threading.Thread(target=a.submit, args=(a.connect_to_peer, b.peer_id))
        thread.start()
        thread.join()
        self.assertIsNone(a.connection(b.peer_id))
        self.avancar(120)
        self.assertEqual(a.connection(b.peer_id).phase, READY)

    def test_erro_no_comando_e_registrado(self):
        hosts = self.criar_hosts(["a", "b"])
        a = hosts["a"]
        estranho = PeerId.from_public_key(generate_static_key())
        a.submit(a.connect_to_peer, estranho)
        with self.assertLogs("p2p_host.host", level="ERROR"):
            self.avancar(1)
