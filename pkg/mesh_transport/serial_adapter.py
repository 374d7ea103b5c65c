import logging
from collections import OrderedDict
from dataclasses import dataclass

from frame_codec.codec import FrameParser, SegmentFrame
from mesh_transport.constants import ALL_NODES, FAILED

logger = logging.getLogger(__name__)

RELATORIOS_MAX = 1024


@dataclass
class RelatorioMensagem:
    """Custos acumulados no mesh para os quadros de uma mensagem do Bridge."""

    msg_id: int
    quadros: int = 0
    concluidos: int = 0
    falhas: int = 0
    mesh_us: int = 0
    link_us: int = 0


class MeshSerialAdapter:
    """
    Lado do dispositivo na serial: cada quadro vindo do host vira uma
    mensagem mesh para o DST do quadro; cada mensagem mesh recebida é
    escrita na serial com o DST trocado pelo endereço de origem.
    """

    def __init__(self, client, port):
        self.client = client
        self.port = port
        self._parser = FrameParser()
        self.relatorios = OrderedDict()
        port.set_receiver(self.on_serial_bytes)
        client.on_message = self.on_mesh_message

    def reset(self):
        """Descarta bytes parciais da serial (nó reiniciado)."""
        self._parser = FrameParser()

    def on_serial_bytes(self, chunk):
        for evento in self._parser.feed(chunk):
            if not isinstance(evento, SegmentFrame):
                logger.warning(f"{self.client.node}: evento na serial do dispositivo: {evento}")
                continue
            self._encaminhar(evento)

    def _encaminhar(self, frame):
        raw = frame.serialize()
        relatorio = self._relatorio(frame.msg_id)
        relatorio.quadros += 1
        dst = frame.address
        if dst == ALL_NODES:
            completions = self.client.broadcast_presence(raw)
        else:
            completions = [self.client.mesh_send(dst, raw)]
        for completion in completions:
            completion.add_done_callback(lambda c, r=relatorio: self._registrar(r, c))

    def _relatorio(self, msg_id):
        relatorio = self.relatorios.get(msg_id)
        if relatorio is None:
            relatorio = RelatorioMensagem(msg_id)
            self.relatorios[msg_id] = relatorio
            while len(self.relatorios) > RELATORIOS_MAX:
                self.relatorios.popitem(last=False)
        return relatorio

    @staticmethod
    def _registrar(relatorio, completion):
        relatorio.concluidos += 1
        if completion.status == FAILED:
            relatorio.falhas += 1
        if completion.delivered_at is not None:
            relatorio.link_us += completion.critical_link_us
            relatorio.mesh_us += completion.delivered_at - completion.started_at - completion.critical_link_us

    def on_mesh_message(self, source, dst, payload):
        eventos = FrameParser().feed(payload)
        quadros = [e for e in eventos if isinstance(e, SegmentFrame)]
        if len(quadros) != 1:
            logger.warning(f"{self.client.node}: mensagem mesh de 0x{source:04X} não é um quadro válido")
            return
        if not self.port.is_open:
            return
        self.port.write(quadros[0].with_dst(source).serialize())
