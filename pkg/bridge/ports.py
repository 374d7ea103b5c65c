"""
Portas duplex de bytes usadas pelo Bridge.

- MemoryPort: par em memória para o simulador; cada sentido modela o tempo de
  linha serial (10 bits por byte) com a linha ocupada serializando as escritas.
- SerialPort: dispositivo serial do sistema (ou URL pyserial, ex. "loop://").
"""
import logging
import math
import threading

import serial

from bridge.exceptions import TransportError

logger = logging.getLogger(__name__)

BITS_POR_BYTE = 10
TIMEOUT = 0.1


def tempo_de_linha_us(n_bytes, baud):
    return math.ceil(n_bytes * BITS_POR_BYTE * 1_000_000 / baud)


class DuplexPort:
    """Interface comum: write(data) -> instante (µs) em que o último byte sai."""

    def __init__(self):
        self._receptor = None
        self.is_open = True

    def set_receiver(self, callback):
        self._receptor = callback

    def write(self, data):
        raise NotImplementedError

    def close(self):
        self.is_open = False

    def _entregar(self, data):
        if self.is_open and self._receptor is not None:
            self._receptor(data)


class MemoryPort(DuplexPort):
    def __init__(self, clock, baud, nome=""):
        super().__init__()
        self.clock = clock
        self.baud = baud
        self.nome = nome
        self.par = None
        self._livre_em = 0
        self.bytes_escritos = 0

    def write(self, data):
        if not self.is_open:
            raise TransportError(f"porta {self.nome} fechada")
        agora = self.clock.now_us()
        inicio = max(agora, self._livre_em)
        fim = inicio + tempo_de_linha_us(len(data), self.baud)
        self._livre_em = fim
        self.bytes_escritos += len(data)
        self.clock.call_later(fim - agora, self.par._entregar, bytes(data))
        return fim

    def reopen(self):
        self.is_open = True
        self._livre_em = self.clock.now_us()


def memory_pipe(clock, baud=115200, nomes=("host", "dispositivo")):
    """Par de portas ligadas entre si (host <-> dispositivo)."""
    a = MemoryPort(clock, baud, nomes[0])
    b = MemoryPort(clock, baud, nomes[1])
    a.par = b
    b.par = a
    return a, b


class SerialPort(DuplexPort):
    """Porta serial real; a leitura roda numa thread e entrega via clock."""

    def __init__(self, port_url, clock, baud=115200):
        super().__init__()
        self.clock = clock
        self._port = serial.serial_for_url(port_url, do_not_open=True)
        self._port.baudrate = baud
        self._port.stopbits = serial.STOPBITS_ONE
        self._port.bytesize = serial.EIGHTBITS
        self._port.parity = serial.PARITY_NONE
        self._port.timeout = TIMEOUT
        self._port.write_timeout = 2
        try:
            self._port.open()
        except serial.SerialException as exc:
            raise TransportError(f"não foi possível abrir {port_url}: {exc}") from exc
        self._leitor = threading.Thread(target=self._ler, name=f"serial-{port_url}", daemon=True)
        self._leitor.start()

    def write(self, data):
        if not self.is_open:
            raise TransportError("porta serial fechada")
        try:
            self._port.write(data)
            self._port.flush()
        except serial.SerialException as exc:
            raise TransportError(f"falha ao escrever na serial: {exc}") from exc
        return self.clock.now_us()

    def close(self):
        super().close()
        self._port.close()

    def _ler(self):
        while self.is_open:
            try:
                data = self._port.read(self._port.in_waiting or 1)
            except (serial.SerialException, TypeError, AttributeError):
                if self.is_open:
                    logger.warning("Leitura serial interrompida")
                break
            if data:
                self.clock.call_soon_threadsafe(self._entregar, data)
