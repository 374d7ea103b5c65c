import itertools

from django.test import SimpleTestCase

from mesh_transport.config import MeshConfig
from mesh_transport.exceptions import MeshConfigError
from mesh_transport.timing import avg_tx_time, seg_interval, segment_count, segment_spacing


class AvgTxTimeTestCase(SimpleTestCase):
    def test_menor_tempo_10ms(self):
        self.assertEqual(avg_tx_time(MeshConfig(t_count=0), 1), 10)

    def test_32_segmentos_320ms(self):
        self.assertEqual(avg_tx_time(MeshConfig(t_count=0), 32), 320)

    def test_duas_transmissoes_extras(self):
        self.assertEqual(avg_tx_time(MeshConfig(t_count=2, t_int_ms=20), 1), 70)

    def test_t_count_explicito_prevalece(self):
        self.assertEqual(avg_tx_time(MeshConfig(), 1, t_count=2), 70)

    def test_zero_segmentos_rejeitado(self):
        with self.assertRaises(ValueError):
            avg_tx_time(MeshConfig(), 0)

    def test_linear_e_monotono(self):
        for t_count, t_int in itertools.product(range(0, 5), range(0, 101, 20)):
            cfg = MeshConfig(t_count=t_count, t_int_ms=t_int)
            um = avg_tx_time(cfg, 1)
            for n in (1, 2, 7, 32):
                self.assertEqual(avg_tx_time(cfg, n), um * n)
            self.assertLessEqual(um, avg_tx_time(MeshConfig(t_count=t_count + 1, t_int_ms=t_int), 1))
            self.assertLessEqual(um, avg_tx_time(MeshConfig(t_count=t_count, t_int_ms=t_int + 10), 1))


class SegIntervalTestCase(SimpleTestCase):
    def test_passo_5_60ms(self):
        self.assertEqual(seg_interval(5), 60)

    def test_passo_0_10ms(self):
        self.assertEqual(seg_interval(0), 10)

    def test_32_segmentos_1920ms(self):
        self.assertEqual(32 * seg_interval(5), 1920)

    def test_negativo(self):
        with self.assertRaises(ValueError):
            seg_interval(-1)


class SegmentacaoTestCase(SimpleTestCase):
    def test_ate_11_bytes_nao_segmenta(self):
        self.assertEqual(segment_count(MeshConfig(), 11), 1)

    def test_quadro_de_255_bytes_22_segmentos(self):
        cfg = MeshConfig()
        self.assertEqual(segment_count(cfg, 255), 22)
        self.assertLessEqual(segment_count(cfg, 255), cfg.max_segments)

    def test_espacamento_padrao(self):
        self.assertEqual(segment_spacing(MeshConfig()), 60)

    def test_espacamento_limitado_pelo_tempo_de_ar(self):
        self.assertEqual(segment_spacing(MeshConfig(tx_seg_int_step=0)), 40)


class MeshConfigTestCase(SimpleTestCase):
    def test_padroes(self):
        cfg = MeshConfig()
        self.assertEqual(cfg.max_payload, 384)
        self.assertEqual(cfg.t_count_para(grupo=False), 1)
        self.assertEqual(cfg.t_count_para(grupo=True), 2)
        self.assertEqual(cfg.retries_para(False), 1)
        self.assertEqual(cfg.retries_para(True), 2)

    def test_negativo(self):
        with self.assertRaises(MeshConfigError):
            MeshConfig(t_int_ms=-1)

    def test_unsegmented_max_grande_demais(self):
        with self.assertRaises(MeshConfigError):
            MeshConfig(unsegmented_max=384)

    def test_chave_desconhecida(self):
        with self.assertRaises(MeshConfigError):
            MeshConfig.from_dict({"t_int": 20})
