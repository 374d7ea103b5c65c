import tempfile
from pathlib import Path

from django.conf import settings
from django.test import SimpleTestCase

from sim_network.exceptions import ScenarioConfigError
from sim_network.scenario import ScenarioConfig

CENARIOS = Path(settings.OEC_SCENARIOS_DIR)


class SetupData:
    def base(self, **extra):
        dados = {
            "nome": "teste",
            "nodes": [
                {"name": "a", "position": [0, 0], "unicast": "0x0027", "role": "sender"},
                {"name": "b", "position": [3, 0], "unicast": "0x0023", "role": "receiver"},
            ],
            "links": [{"between": ["a", "b"], "base_latency_ms": 5, "loss_p": 0.0}],
        }
        dados.update(extra)
        return dados


class ScenarioConfigTestCase(SetupData, SimpleTestCase):
    def test_padroes(self):
        config = ScenarioConfig.from_dict(self.base())
        self.assertEqual(config.packet_count, 100)
        self.assertEqual(config.send_interval_s, 9)
        self.assertEqual(config.keep_alive_s, 540)
        self.assertEqual(config.sender.name, "a")
        self.assertEqual(config.receiver.unicast, 0x0023)

    def test_no_inexistente_no_enlace(self):
        dados = self.base(links=[{"between": ["a", "z"]}])
        with self.assertRaises(ScenarioConfigError):
            ScenarioConfig.from_dict(dados)

    def test_intervalo_nao_positivo(self):
        with self.assertRaises(ScenarioConfigError):
            ScenarioConfig.from_dict(self.base(send_interval_s=0))

    def test_chave_mesh_desconhecida(self):
        with self.assertRaises(ScenarioConfigError):
            ScenarioConfig.from_dict(self.base(mesh={"t_int": 20}))

    def test_sem_receiver(self):
        dados = self.base()
        dados["nodes"][1]["role"] = ""
        with self.assertRaises(ScenarioConfigError):
            ScenarioConfig.from_dict(dados)

    def test_papel_desconhecido(self):
        dados = self.base()
        dados["nodes"].append({"name": "c", "unicast": "0x0030", "role": "relay"})
        with self.assertRaises(ScenarioConfigError):
            ScenarioConfig.from_dict(dados)

    def test_posicao_aplica_parametros(self):
        dados = self.base(positions={"longe": {"nodes": {"b": [40, 0]}, "link": {"loss_p": 0.2}}})
        config = ScenarioConfig.from_dict(dados).for_position("longe")
        self.assertEqual(config.position, "longe")
        self.assertEqual(config.node("b").position, (40.0, 0.0))
        self.assertEqual(config.links[0].model.loss_p, 0.2)
        self.assertEqual(config.topology().distance("a", "b"), 40.0)

    def test_posicao_inexistente(self):
        with self.assertRaises(ScenarioConfigError):
            ScenarioConfig.from_dict(self.base()).for_position("x")

    def test_com_revalida(self):
        config = ScenarioConfig.from_dict(self.base())
        with self.assertRaises(ScenarioConfigError):
            config.com(packet_count=0)

    def test_arquivo_inexistente(self):
        with self.assertRaises(ScenarioConfigError):
            ScenarioConfig.load("/nao/existe.scenario")

    def test_yaml_invalido(self):
        with tempfile.TemporaryDirectory() as pasta:
            caminho = Path(pasta) / "quebrado.scenario"
            caminho.write_text("nodes: [\n", encoding="utf-8")
            with self.assertRaises(ScenarioConfigError):
                ScenarioConfig.load(caminho)


class CenariosDistribuidosTestCase(SimpleTestCase):
    def test_home_posicoes(self):
        config = ScenarioConfig.load(CENARIOS / "home.scenario")
        self.assertEqual(config.position, "pos1")
        self.assertEqual(sorted(config.positions), ["pos1", "pos2", "pos3", "pos4"])
        self.assertEqual(config.message_size_bytes, 584)
        for posicao, perda in (("pos1", 0.0), ("pos2", 0.0), ("pos3", 0.0), ("pos4", 0.0087)):
            with self.subTest(posicao=posicao):
                modelo = ScenarioConfig.load(CENARIOS / "home.scenario", posicao).links[0].model
                self.assertEqual(modelo.loss_p, perda)

    def test_workshop_distancias(self):
        for posicao, distancia, perda in (("pos1", 43.0, 0.0087), ("pos2", 117.0, 0.0198)):
            with self.subTest(posicao=posicao):
                config = ScenarioConfig.load(CENARIOS / "workshop.scenario", posicao)
                self.assertEqual(config.topology().distance("emissor", "receptor"), distancia)
                self.assertEqual(config.links[0].model.loss_p, perda)
                self.assertTrue(config.topology().link("emissor", "receptor").in_range)
