from django.test import SimpleTestCase

from pubsub.exceptions import RecordFormatError
from pubsub.records import PubSubMessage, Subscription, decode_records, encode_record


class RecordsTestCase(SimpleTestCase):
    def test_assinatura_em_bytes(self):
        self.assertEqual(encode_record(Subscription("oec")).hex(), "0501036f6563")
        self.assertEqual(encode_record(Subscription("oec", False)).hex(), "0502036f6563")

    def test_varios_registros_no_mesmo_buffer(self):
        msg = PubSubMessage("QmOrigem", 7, "oec", b"\x00\x01carga")
        data = encode_record(Subscription("oec")) + encode_record(msg) + encode_record(Subscription("x", False))
        self.assertEqual(decode_records(data), [Subscription("oec"), msg, Subscription("x", False)])

    def test_chave_da_mensagem(self):
        self.assertEqual(PubSubMessage("QmA", 3, "t", b"").key, ("QmA", 3))

    def test_registro_truncado(self):
        data = encode_record(PubSubMessage("QmA", 1, "oec", b"carga"))
        with self.assertRaises(RecordFormatError):
            decode_records(data[:-1])

    def test_tipo_desconhecido(self):
        with self.assertRaises(RecordFormatError):
            decode_records(bytes.fromhex("0509036f6563"))

    def test_bytes_sobrando_na_assinatura(self):
        with self.assertRaises(RecordFormatError):
            decode_records(bytes.fromhex("0601036f656300"))

    def test_registro_vazio(self):
        with self.assertRaises(RecordFormatError):
            decode_records(b"\x00")

    def test_erro_tambem_e_value_error(self):
        with self.assertRaises(ValueError):
            decode_records(b"\x05\x01")
