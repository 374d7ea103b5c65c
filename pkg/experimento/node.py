import logging

from bridge.bridge import Bridge
from bridge.ports import memory_pipe
from mesh_transport.network import MeshClient
from mesh_transport.serial_adapter import MeshSerialAdapter
from p2p_host.host import Host
from p2p_host.peer_id import generate_static_key
from pubsub.floodsub import FloodSub
from sim_network.rng import node_rng

logger = logging.getLogger(__name__)


class SimNode:
    """
    Nó completo do experimento: host P2P e Bridge de um lado da serial em
    memória, adaptador e cliente mesh do outro.
    """

    def __init__(self, spec, sim, network, scenario, seed):
        self.spec = spec
        self.name = spec.name
        self.sim = sim
        self.rng = node_rng(seed, spec.name)
        self.static_key = generate_static_key(self.rng)

        self.client = MeshClient(network, spec.name, self.rng)
        network.provision(self.client, spec.unicast, spec.groups)
        self.client.set_online(False)

        self.porta_host, self.porta_dispositivo = memory_pipe(
            sim, scenario.bridge.baud, nomes=(f"{spec.name}/host", f"{spec.name}/dispositivo")
        )
        self.adapter = MeshSerialAdapter(self.client, self.porta_dispositivo)
        self.bridge = Bridge(
            self.porta_host,
            sim,
            inter_segment_delay_ms=scenario.bridge.inter_segment_delay_ms,
            reassembly_timeout_ms=scenario.bridge.reassembly_timeout_ms,
            nome=spec.name,
        )
        self.host = Host(
            spec.name,
            sim,
            self.bridge,
            static_key=self.static_key,
            rng=self.rng,
            keep_alive_s=scenario.keep_alive_s,
        )
        self.pubsub = FloodSub.attach(self.host, strict=scenario.strict_floodsub)
        self.online = False
        self.entradas = 0

    def __repr__(self):
        return f"<SimNode {self.name} {'online' if self.online else 'offline'}>"

    @property
    def peer_id(self):
        return self.host.peer_id

    def em_transito(self, peer):
        """Mensagens para o peer ainda na conexão, no Bridge ou no cliente mesh."""
        if not self.online:
            return False
        conexao = self.host.connection(peer)
        return bool(conexao is not None and conexao.pendente) or self.bridge.pendente or self.client.ocupado

    def join(self):
        if self.online:
            return
        self.online = True
        self.entradas += 1
        if self.entradas > 1:
            self.bridge.reopen()
            self.porta_dispositivo.reopen()
            self.adapter.reset()
            logger.info(f"{self.name}: nó de volta à rede")
        self.client.set_online(True)
        self.host.start()

    def leave(self):
        if not self.online:
            return
        self.online = False
        logger.info(f"{self.name}: nó saiu da rede")
        self.host.stop()
        self.bridge.close()
        self.porta_dispositivo.close()
        self.client.set_online(False)
