import struct


class VarintIncompleto(ValueError):
    """O buffer terminou antes do último byte do varint."""


def encode_uvarint(num):
    if num < 0:
        raise ValueError(f"varint sem sinal não aceita {num}")
    _next = 1
    values = []
    while _next:
        _next = num >> 7
        shift = 128 if _next else 0
        part = (num & 127) | shift
        values.append(struct.pack("B", part))
        num = _next
    return b"".join(values)


def decode_uvarint(data, index=0):
    """Retorna (valor, próximo índice). Levanta VarintIncompleto se faltar byte."""
    item = 128
    num = 0
    left = 0
    while item & 128:
        if index >= len(data):
            raise VarintIncompleto(f"varint incompleto na posição {index}")
        item = data[index]
        index += 1
        num += (item & 127) << left
        left += 7
        if left > 63:
            raise ValueError("varint maior que 64 bits")
    return num, index


def length_prefixed(data):
    return encode_uvarint(len(data)) + bytes(data)


def read_length_prefixed(data, index=0):
    """Lê um campo uvarint(len) ‖ bytes. Retorna (bytes, próximo índice)."""
    size, index = decode_uvarint(data, index)
    end = index + size
    if end > len(data):
        raise VarintIncompleto(f"campo de {size} bytes truncado")
    return bytes(data[index:end]), end


def ms_to_us(ms):
    return int(round(ms * 1000))


def s_to_us(s):
    return int(round(s * 1_000_000))


def us_to_ms(us):
    return us / 1000
