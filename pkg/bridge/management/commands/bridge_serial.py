import queue
import time

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from bridge.bridge import Bridge
from bridge.exceptions import TransportError
from bridge.ports import SerialPort
from dados_comuns.clock import RealTimeClock
from mesh_transport.addresses import MeshAddress


class Command(BaseCommand):
    help = "Envia uma mensagem pelo Bridge numa porta serial real e mostra o que chegar"

    def add_arguments(self, parser):
        parser.add_argument("--port", default=None, help="Dispositivo ou URL pyserial (ex.: loop://)")
        parser.add_argument("--baud", type=int, default=None)
        parser.add_argument("--dst", default="0xC000", help="Endereço mesh de destino")
        parser.add_argument("--mensagem", default="hi")
        parser.add_argument("--delay-ms", type=float, default=None, help="Intervalo entre segmentos")
        parser.add_argument("--aguardar-s", type=float, default=2.0, help="Tempo de escuta após o envio")

    def handle(self, *args, **options):
        porta = options["port"] or getattr(settings, "OEC_SERIAL_PORT", "")
        if not porta:
            raise CommandError("informe --port ou configure OEC_SERIAL_PORT")
        baud = options["baud"] or getattr(settings, "OEC_SERIAL_BAUD", 115200)
        try:
            destino = MeshAddress.parse(options["dst"]).value
        except ValueError as exc:
            raise CommandError(f"endereço inválido: {options['dst']}") from exc

        relogio = RealTimeClock()
        try:
            bridge = Bridge(SerialPort(porta, relogio, baud), relogio, inter_segment_delay_ms=options["delay_ms"], nome=porta)
        except TransportError as exc:
            raise CommandError(str(exc)) from exc

        try:
            handle = bridge.bridge_send(options["mensagem"].encode("utf-8"), destino)
            self.stdout.write(f"Mensagem {handle.msg_id} enviada em {handle.n_frames} segmentos para 0x{destino:04X}")
            limite = time.monotonic() + options["aguardar_s"]
            while True:
                restante = limite - time.monotonic()
                if restante <= 0:
                    break
                try:
                    entrega = bridge.entregues.get(timeout=restante)
                except queue.Empty:
                    break
                texto = entrega.payload.decode("utf-8", errors="replace")
                self.stdout.write(f"0x{entrega.source:04X} [{entrega.msg_id}]: {texto}")
        except TransportError as exc:
            raise CommandError(str(exc)) from exc
        finally:
            bridge.close()
