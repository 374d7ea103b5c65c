import contextlib
import io
import tempfile
from pathlib import Path

import yaml
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase, TestCase

from experimento.cli import cli_main
from experimento.models import Execucao, RegistroPacote
from experimento.reports import read_csv

CENARIO = {
    "nome": "rapido",
    "seed": 5,
    "packet_count": 3,
    "send_interval_s": 9,
    "keep_alive_s": 0,
    "message_size_bytes": 24,
    "nodes": [
        {"name": "emissor", "position": [0, 0], "unicast": "0x0027", "role": "sender"},
        {"name": "receptor", "position": [3, 0], "unicast": "0x0023", "role": "receiver"},
    ],
    "links": [{"between": ["emissor", "receptor"], "base_latency_ms": 5, "jitter_ms": 1, "max_range_m": 60}],
    "default_position": "perto",
    "positions": {
        "perto": {"nodes": {"receptor": [3, 0]}},
        "longe": {"nodes": {"receptor": [50, 0]}},
    },
}


class SetupData:
    def setUp(self):
        self._pasta = tempfile.TemporaryDirectory()
        self.pasta = Path(self._pasta.name)
        self.cenario = self.pasta / "rapido.scenario"
        self.cenario.write_text(yaml.safe_dump(CENARIO), encoding="utf-8")
        self.saida = self.pasta / "saida.csv"

    def tearDown(self):
        self._pasta.cleanup()

    def executar(self, **opcoes):
        stdout = io.StringIO()
        call_command("run_experiment", scenario=str(self.cenario), out=str(self.saida), stdout=stdout, **opcoes)
        return stdout.getvalue()


class RunExperimentCommandTestCase(SetupData, TestCase):
    def test_grava_csv_e_resumo(self):
        saida = self.executar()
        registros = read_csv(self.saida)
        self.assertEqual(len(registros), 3)
        self.assertIn("rapido/perto seed 5: mean=", saida)
        self.assertIn("PDR=100.00% (3/3)", saida)

    def test_ajustes_pela_linha_de_comando(self):
        saida = self.executar(packets=2, seed=9, position="longe", breakdown=True)
        self.assertIn("rapido/longe seed 9", saida)
        cabecalho = self.saida.read_text(encoding="utf-8").splitlines()[0]
        self.assertTrue(cabecalho.endswith("mesh_ms,bridge_ms,link_ms"))
        self.assertEqual(len(read_csv(self.saida)), 2)

    def test_varias_execucoes(self):
        saida = self.executar(packets=2, runs=2)
        self.assertTrue((self.pasta / "saida_run01.csv").exists())
        self.assertTrue((self.pasta / "saida_run02.csv").exists())
        self.assertIn("rapido/perto seed 6", saida)
        self.assertIn("2 execuções: PDR=100.00%", saida)

    def test_persistencia(self):
        self.executar(persist=True, strict_floodsub=True)
        execucao = Execucao.objects.get()
        self.assertEqual(str(execucao), "rapido/perto seed 5")
        self.assertEqual(execucao.pacotes, 3)
        self.assertEqual(execucao.entregues, 3)
        self.assertTrue(execucao.strict_floodsub)
        self.assertEqual(RegistroPacote.objects.filter(execucao=execucao).count(), 3)
        self.assertEqual(list(execucao.registros.values_list("indice", flat=True)), [0, 1, 2])

    def test_mensagem_padrao_de_2000_bytes(self):
        saida = self.executar(packets=2, persist=True)
        self.assertIn("PDR=100.00% (2/2)", saida)
        execucao = Execucao.objects.get()
        self.assertEqual(execucao.tamanho_mensagem, 2000)
        self.assertEqual(execucao.entregues, 2)

    def test_tamanho_pela_linha_de_comando(self):
        self.executar(packets=1, message_bytes=24, persist=True)
        self.assertEqual(Execucao.objects.get().tamanho_mensagem, 24)

    def test_cenario_inexistente(self):
        with self.assertRaises(CommandError):
            call_command("run_experiment", scenario=str(self.pasta / "nao_existe.scenario"), stdout=io.StringIO())

    def test_posicao_inexistente(self):
        with self.assertRaises(CommandError):
            self.executar(position="lua")

    def test_saida_em_pasta_inexistente(self):
        with self.assertRaises(CommandError):
            call_command(
                "run_experiment",
                scenario=str(self.cenario),
                out=str(self.pasta / "nao" / "existe.csv"),
                packets=1,
                stdout=io.StringIO(),
            )

    def test_runs_invalido(self):
        with self.assertRaises(CommandError):
            self.executar(runs=0)


class CliTestCase(SetupData, SimpleTestCase):
    def rodar(self, *argv):
        with contextlib.redirect_stdout(io.StringIO()), contextlib.redirect_stderr(io.StringIO()):
            return cli_main(list(argv))

    def test_sucesso(self):
        self.assertEqual(self.rodar("--scenario", str(self.cenario), "--out", str(self.saida), "--packets", "1"), 0)
        self.assertTrue(self.saida.exists())

    def test_erro_de_configuracao(self):
        self.assertEqual(self.rodar("--scenario", str(self.pasta / "nao_existe.scenario")), 1)

    def test_uso_incorreto(self):
        self.assertEqual(self.rodar("--packets", "muitos"), 2)
        self.assertEqual(self.rodar("--flag-que-nao-existe"), 2)
