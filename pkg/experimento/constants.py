# status do pacote

ENTREGUE = "delivered"
PERDIDO = "lost"

STATUS_PACOTE = (
    (ENTREGUE, "Entregue"),
    (PERDIDO, "Perdido"),
)

# CSV por pacote

COLUNAS_CSV = ("index", "sent_ms", "recv_ms", "latency_ms", "status")
COLUNAS_BREAKDOWN = ("mesh_ms", "bridge_ms", "link_ms")
FORMATO_MS = "%.3f"

# execução

INDICE_BYTES = 4
TAMANHO_MENSAGEM_PADRAO = 2000
FOLGA_FINAL_S = 120
LIMITE_DRENAGEM_S = 7200
Z_95 = 1.959963984540054
