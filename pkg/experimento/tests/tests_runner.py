import io
from unittest import mock

from django.test import SimpleTestCase, override_settings

from experimento.exceptions import ExperimentoError
from experimento.reports import write_csv
from experimento.runner import horizonte_us, payload_do_pacote, run_experiment, run_many
from sim_network.scenario import ScenarioConfig


class SetupData:
    def cenario(self, **extra):
        dados = {
            "nome": "rapido",
            "seed": 3,
            "packet_count": 5,
            "send_interval_s": 9,
            "keep_alive_s": 0,
            "message_size_bytes": 40,
            "nodes": [
                {"name": "emissor", "position": [0, 0], "unicast": "0x0027", "role": "sender"},
                {"name": "receptor", "position": [3, 0], "unicast": "0x0023", "role": "receiver"},
            ],
            "links": [
                {"between": ["emissor", "receptor"], "base_latency_ms": 5, "jitter_ms": 1, "loss_p": 0.0, "max_range_m": 60}
            ],
        }
        dados.update(extra)
        return ScenarioConfig.from_dict(dados)


class RunExperimentTestCase(SetupData, SimpleTestCase):
    def test_todos_entregues_sem_perda(self):
        resultado = run_experiment(self.cenario())
        self.assertEqual(resultado.seed, 3)
        self.assertIsNotNone(resultado.ready_at_ms)
        self.assertEqual(resultado.report.sent, 5)
        self.assertEqual(resultado.report.pdr, 100.0)
        self.assertTrue(all(r.latency > 0 for r in resultado.records))
        self.assertEqual(resultado.summary["entregues"], 5)

    def test_publicacoes_espacadas_pelo_intervalo(self):
        resultado = run_experiment(self.cenario())
        registros = resultado.records
        self.assertEqual(registros[0].sent_at, resultado.ready_at_ms)
        for anterior, atual in zip(registros, registros[1:]):
            self.assertAlmostEqual(atual.sent_at - anterior.sent_at, 9000.0)
            self.assertGreater(atual.received_at, anterior.received_at)

    def test_decomposicao_soma_a_latencia(self):
        resultado = run_experiment(self.cenario())
        self.assertEqual(len(resultado.breakdown), 5)
        for indice, mesh_ms, bridge_ms, link_ms in resultado.breakdown:
            registro = resultado.records[indice]
            self.assertGreater(mesh_ms, 0)
            self.assertGreaterEqual(link_ms, 0)
            self.assertAlmostEqual(mesh_ms + bridge_ms + link_ms, registro.latency)

    def test_mesma_seed_mesmo_csv(self):
        saidas = []
        for _ in range(2):
            saida = io.StringIO()
            write_csv(run_experiment(self.cenario(), seed=11).records, saida, breakdown=True)
            saidas.append(saida.getvalue())
        self.assertEqual(saidas[0], saidas[1])

    def test_exige_cenario(self):
        with self.assertRaises(ExperimentoError):
            run_experiment({"nome": "x"})

    def test_saida_e_volta_do_receptor(self):
        config = self.cenario(
            packet_count=12,
            churn=[{"node": "receptor", "leave_at_s": 40, "join_at_s": 70}],
        )
        registros = run_experiment(config).records
        self.assertTrue(registros[0].delivered)
        self.assertTrue(registros[-1].delivered)
        self.assertTrue(any(not r.delivered for r in registros))

    def test_varias_seeds(self):
        resultados = run_many(self.cenario(packet_count=2), [1, 2], workers=1)
        self.assertEqual([r.seed for r in resultados], [1, 2])

    def test_pool_de_processos_igual_ao_sequencial(self):
        config = self.cenario(packet_count=2)
        paralelo = run_many(config, [1, 2, 3], workers=2)
        sequencial = run_many(config, [1, 2, 3], workers=1)
        self.assertEqual([r.seed for r in paralelo], [1, 2, 3])
        for a, b in zip(paralelo, sequencial):
            csv_a, csv_b = io.StringIO(), io.StringIO()
            write_csv(a.records, csv_a)
            write_csv(b.records, csv_b)
            self.assertEqual(csv_a.getvalue(), csv_b.getvalue())

    @override_settings(OEC_RUN_WORKERS=4)
    def test_paralelo_por_padrao(self):
        with mock.patch("experimento.runner.ProcessPoolExecutor") as executor:
            executor.return_value.__enter__.return_value.map.return_value = iter(["a", "b"])
            self.assertEqual(run_many(self.cenario(), [1, 2]), ["a", "b"])
        executor.assert_called_once_with(max_workers=2)


class AuxiliaresTestCase(SetupData, SimpleTestCase):
    def test_payload_com_indice(self):
        payload = payload_do_pacote(7, 40)
        self.assertEqual(len(payload), 40)
        self.assertEqual(payload[:4], b"\x00\x00\x00\x07")
        self.assertEqual(payload, payload_do_pacote(7, 40))

    @override_settings(OEC_CONNECT_TIMEOUT_S=30, OEC_CONNECT_RETRIES=3)
    def test_horizonte(self):
        self.assertEqual(horizonte_us(self.cenario()), 276_000_000)
        churn = self.cenario(churn=[{"node": "receptor", "leave_at_s": 40, "join_at_s": 70}])
        self.assertEqual(horizonte_us(churn), 346_000_000)
