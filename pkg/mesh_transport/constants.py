# endereços

GROUP_BASE = 0xC000
ALL_NODES = 0xFFFF
UNICAST_MIN = 0x0001
UNICAST_MAX = 0x7FFF

UNICAST = "unicast"
GROUP = "group"

# transmissões extras padrão

T_COUNT_UNICAST = 1
T_COUNT_MULTICAST = 2

# custo fixo por transmissão e atraso do ACK, em ms

CUSTO_TRANSMISSAO_MS = 10
ATRASO_ACK_MS = 10

# status de conclusão de um envio

ACKED = "acked"
FAILED = "failed"
SENT = "sent"
