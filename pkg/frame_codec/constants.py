# cabeçalho do quadro serial

VERSAO = 1
HEADER_LEN = 13
DST_LEN = 6
LENGTH_LEN = 4

# delimitadores (fora do alfabeto hexadecimal)

START_MARKER = b"<<"
END_MARKER = b">>>"

# limites

MAX_DATA = 227
MAX_FRAME = 255
MIN_PAYLOAD = 1
MAX_PAYLOAD = 2000

# flags do cabeçalho

FLAG_FINAL = 0x01

HEX_ALPHABET = frozenset(b"0123456789ABCDEF")
