from decimal import Decimal

from django.db import transaction

from experimento.models import Execucao, RegistroPacote


def _decimal(valor, casas=3):
    if valor is None:
        return None
    return Decimal(f"{valor:.{casas}f}")


@transaction.atomic
def registrar_execucao(resultado):
    """Grava uma execução e os registros por pacote."""
    config = resultado.config
    relatorio = resultado.report
    execucao = Execucao.objects.create(
        cenario=config.nome,
        posicao=config.position,
        seed=resultado.seed,
        pacotes=relatorio.sent,
        entregues=relatorio.delivered,
        pdr=_decimal(relatorio.pdr, 2),
        latencia_media_ms=_decimal(relatorio.mean_latency),
        desvio_padrao_ms=_decimal(relatorio.stddev),
        intervalo_s=_decimal(config.send_interval_s),
        keep_alive_s=_decimal(config.keep_alive_s),
        tamanho_mensagem=config.message_size_bytes,
        strict_floodsub=config.strict_floodsub,
    )
    RegistroPacote.objects.bulk_create(
        RegistroPacote(
            execucao=execucao,
            indice=r.index,
            enviado_ms=_decimal(r.sent_at),
            recebido_ms=_decimal(r.received_at),
            latencia_ms=_decimal(r.latency),
            status=r.status,
            mesh_ms=_decimal(r.mesh_ms),
            bridge_ms=_decimal(r.bridge_ms),
            link_ms=_decimal(r.link_ms),
        )
        for r in resultado.records
    )
    return execucao
