"""
Arquivo de cenário (YAML).

    nome: home
    seed: 1
    packet_count: 100
    send_interval_s: 9
    keep_alive_s: 540
    message_size_bytes: 584
    topic: oec
    bridge: {inter_segment_delay_ms: 60, reassembly_timeout_ms: 10000, baud: 115200}
    mesh: {t_int_ms: 20, retries_unicast: 1, retries_multicast: 2}
    sar: {tx_seg_int_step: 5, rx_seg_int_step: 5}
    nodes:
      - {name: emissor, position: [0, 0], unicast: "0x0027", groups: ["0xC000"], role: sender}
      - {name: receptor, position: [3, 0], unicast: "0x0023", groups: ["0xC000"], role: receiver}
    links:
      - {between: [emissor, receptor], base_latency_ms: 5, jitter_ms: 1, loss_p: 0, max_range_m: 60}
    default_position: pos1
    positions:
      pos1: {nodes: {receptor: [3, 0]}, link: {loss_p: 0.0}}
    churn:
      - {node: receptor, leave_at_s: 300, join_at_s: 400}
"""
import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from mesh_transport.addresses import MeshAddress
from mesh_transport.config import MeshConfig
from mesh_transport.exceptions import MeshConfigError
from sim_network.exceptions import ScenarioConfigError
from sim_network.links import LinkModel
from sim_network.topology import Topology

SENDER = "sender"
RECEIVER = "receiver"

PAPEIS = (
    (SENDER, "Emissor"),
    (RECEIVER, "Receptor"),
)

MAX_MESSAGE_BYTES = 65_536


@dataclass(frozen=True)
class NodeSpec:
    name: str
    position: tuple
    unicast: int
    groups: tuple = (0xC000,)
    role: str = ""


@dataclass(frozen=True)
class LinkSpec:
    a: str
    b: str
    model: LinkModel


@dataclass(frozen=True)
class BridgeSettings:
    inter_segment_delay_ms: float = 60
    reassembly_timeout_ms: float = 10_000
    baud: int = 115_200


@dataclass(frozen=True)
class ChurnSpec:
    node: str
    leave_at_s: float = None
    join_at_s: float = None


@dataclass(frozen=True)
class PositionSpec:
    nodes: dict = field(default_factory=dict)
    link: dict = field(default_factory=dict)
    description: str = ""


@dataclass(frozen=True)
class ScenarioConfig:
    nome: str
    nodes: tuple
    links: tuple
    mesh: MeshConfig = field(default_factory=MeshConfig)
    bridge: BridgeSettings = field(default_factory=BridgeSettings)
    packet_count: int = 100
    send_interval_s: float = 9
    keep_alive_s: float = 540
    message_size_bytes: int = 2000
    seed: int = 0
    topic: str = "oec"
    strict_floodsub: bool = False
    churn: tuple = ()
    positions: dict = field(default_factory=dict)
    position: str = None
    description: str = ""

    def __post_init__(self):
        nomes = [n.name for n in self.nodes]
        if len(set(nomes)) != len(nomes):
            raise ScenarioConfigError("nomes de nós repetidos")
        enderecos = [n.unicast for n in self.nodes]
        if len(set(enderecos)) != len(enderecos):
            raise ScenarioConfigError("endereços unicast repetidos")
        for link in self.links:
            for ponta in (link.a, link.b):
                if ponta not in nomes:
                    raise ScenarioConfigError(f"enlace referencia nó inexistente: {ponta}")
        for evento in self.churn:
            if evento.node not in nomes:
                raise ScenarioConfigError(f"churn referencia nó inexistente: {evento.node}")
        for nome, posicao in self.positions.items():
            for no in posicao.nodes:
                if no not in nomes:
                    raise ScenarioConfigError(f"posição {nome} referencia nó inexistente: {no}")
        if self.send_interval_s <= 0:
            raise ScenarioConfigError("send_interval_s deve ser positivo")
        if self.packet_count < 1:
            raise ScenarioConfigError("packet_count deve ser >= 1")
        if self.keep_alive_s < 0:
            raise ScenarioConfigError("keep_alive_s não pode ser negativo")
        if not 4 <= self.message_size_bytes <= MAX_MESSAGE_BYTES:
            raise ScenarioConfigError(f"message_size_bytes fora de [4, {MAX_MESSAGE_BYTES}]")
        papeis = [n.role for n in self.nodes]
        desconhecidos = sorted({p for p in papeis if p and p not in dict(PAPEIS)})
        if desconhecidos:
            raise ScenarioConfigError(f"papéis desconhecidos: {', '.join(desconhecidos)}")
        if papeis.count(SENDER) != 1 or papeis.count(RECEIVER) != 1:
            raise ScenarioConfigError("o cenário precisa de exatamente um sender e um receiver")

    @property
    def sender(self):
        return next(n for n in self.nodes if n.role == SENDER)

    @property
    def receiver(self):
        return next(n for n in self.nodes if n.role == RECEIVER)

    def node(self, name):
        return next(n for n in self.nodes if n.name == name)

    def com(self, **kwargs):
        try:
            return dataclasses.replace(self, **kwargs)
        except (TypeError, ValueError) as exc:
            raise ScenarioConfigError(str(exc)) from exc

    def for_position(self, name):
        """Cenário com as posições e parâmetros de enlace da posição nomeada."""
        if name not in self.positions:
            raise ScenarioConfigError(
                f"posição {name!r} não existe em {self.nome} (há: {', '.join(sorted(self.positions))})"
            )
        posicao = self.positions[name]
        nodes = tuple(
            dataclasses.replace(n, position=tuple(posicao.nodes[n.name])) if n.name in posicao.nodes else n
            for n in self.nodes
        )
        try:
            links = tuple(
                dataclasses.replace(l, model=l.model.com(**posicao.link)) for l in self.links
            )
        except TypeError as exc:
            raise ScenarioConfigError(f"posição {name}: {exc}") from exc
        return self.com(nodes=nodes, links=links, position=name)

    def topology(self):
        return Topology(
            positions={n.name: n.position for n in self.nodes},
            links={(l.a, l.b): l.model for l in self.links},
        )

    @classmethod
    def from_dict(cls, data, nome=None):
        if not isinstance(data, dict):
            raise ScenarioConfigError("o cenário deve ser um mapeamento YAML")
        try:
            return cls._from_dict(data, nome)
        except ScenarioConfigError:
            raise
        except (KeyError, TypeError, ValueError, MeshConfigError) as exc:
            raise ScenarioConfigError(f"cenário inválido: {exc}") from exc

    @classmethod
    def _from_dict(cls, data, nome):
        nodes = tuple(
            NodeSpec(
                name=str(n["name"]),
                position=tuple(float(v) for v in n.get("position", (0.0, 0.0))),
                unicast=MeshAddress.parse(n["unicast"]).value,
                groups=tuple(MeshAddress.parse(g).value for g in n.get("groups", ["0xC000"])),
                role=n.get("role", ""),
            )
            for n in data.get("nodes", [])
        )
        links = []
        for l in data.get("links", []):
            a, b = l["between"]
            parametros = {k: v for k, v in l.items() if k != "between"}
            links.append(LinkSpec(str(a), str(b), LinkModel(**parametros)))
        mesh = MeshConfig.from_dict({**(data.get("mesh") or {}), **(data.get("sar") or {})})
        bridge = BridgeSettings(**(data.get("bridge") or {}))
        churn = tuple(ChurnSpec(**c) for c in data.get("churn", []) or [])
        positions = {
            str(k): PositionSpec(
                nodes={no: tuple(p) for no, p in (v.get("nodes") or {}).items()},
                link=dict(v.get("link") or {}),
                description=v.get("description", ""),
            )
            for k, v in (data.get("positions") or {}).items()
        }
        escalares = {
            chave: data[chave]
            for chave in (
                "packet_count",
                "send_interval_s",
                "keep_alive_s",
                "message_size_bytes",
                "seed",
                "topic",
                "strict_floodsub",
                "description",
            )
            if chave in data
        }
        return cls(
            nome=str(data.get("nome") or nome or "cenario"),
            nodes=nodes,
            links=tuple(links),
            mesh=mesh,
            bridge=bridge,
            churn=churn,
            positions=positions,
            **escalares,
        )

    @classmethod
    def load(cls, path, position=None):
        path = Path(path)
        try:
            data = yaml.safe_load(path.read_text(encoding="utf-8"))
        except FileNotFoundError as exc:
            raise ScenarioConfigError(f"arquivo de cenário não encontrado: {path}") from exc
        except (OSError, yaml.YAMLError) as exc:
            raise ScenarioConfigError(f"não foi possível ler {path}: {exc}") from exc
        config = cls.from_dict(data, nome=path.stem)
        position = position or (data or {}).get("default_position")
        if position:
            config = config.for_position(position)
        return config
