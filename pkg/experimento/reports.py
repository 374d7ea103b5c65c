import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from experimento.constants import COLUNAS_BREAKDOWN, COLUNAS_CSV, ENTREGUE, FORMATO_MS, PERDIDO, Z_95
from experimento.exceptions import ExperimentoError


@dataclass
class PacketRecord:
    index: int
    sent_at: float = None
    received_at: float = None
    latency: float = None
    status: str = PERDIDO
    mesh_ms: float = None
    bridge_ms: float = None
    link_ms: float = None

    @property
    def delivered(self):
        return self.status == ENTREGUE


@dataclass
class RunReport:
    records: list
    mean_latency: float = None
    stddev: float = None
    stddev_series: list = field(default_factory=list)
    pdr: float = 0.0
    sent: int = 0
    delivered: int = 0
    median_latency: float = None
    max_latency: float = None
    max_latency_index: int = None
    zero_delivered: bool = False


def report_stats(records):
    """
    Média e desvio padrão populacional sobre os pacotes entregues; a série
    de desvio traz, para cada índice, o desvio das latências entregues até ele.
    """
    if not records:
        raise ExperimentoError("o relatório exige ao menos um registro")
    registros = sorted(records, key=lambda r: r.index)
    entregues = [r for r in registros if r.delivered]
    relatorio = RunReport(
        records=registros,
        sent=len(registros),
        delivered=len(entregues),
        pdr=100.0 * len(entregues) / len(registros),
    )
    serie = []
    acumuladas = []
    for registro in registros:
        if registro.delivered:
            acumuladas.append(registro.latency)
        serie.append(float(np.std(acumuladas)) if acumuladas else None)
    relatorio.stddev_series = serie
    if not entregues:
        relatorio.zero_delivered = True
        return relatorio
    latencias = np.array([r.latency for r in entregues], dtype=float)
    relatorio.mean_latency = float(latencias.mean())
    relatorio.stddev = float(latencias.std())
    relatorio.median_latency = float(np.median(latencias))
    maior = int(latencias.argmax())
    relatorio.max_latency = float(latencias[maior])
    relatorio.max_latency_index = entregues[maior].index
    return relatorio


def wilson(sucessos, total, z=Z_95):
    """Intervalo de Wilson para uma proporção; devolve (baixo, alto) em [0, 1]."""
    if total <= 0:
        raise ExperimentoError("intervalo de Wilson sem observações")
    p = sucessos / total
    denominador = 1 + z * z / total
    centro = (p + z * z / (2 * total)) / denominador
    margem = z * math.sqrt(p * (1 - p) / total + z * z / (4 * total * total)) / denominador
    return max(0.0, centro - margem), min(1.0, centro + margem)


def _ms(valor):
    return "" if valor is None else FORMATO_MS % valor


def linhas_csv(records, breakdown=False):
    colunas = COLUNAS_CSV + (COLUNAS_BREAKDOWN if breakdown else ())
    yield colunas
    for r in sorted(records, key=lambda r: r.index):
        linha = [str(r.index), _ms(r.sent_at), _ms(r.received_at), _ms(r.latency), r.status]
        if breakdown:
            linha += [_ms(r.mesh_ms), _ms(r.bridge_ms), _ms(r.link_ms)]
        yield linha


def write_csv(records, destino, breakdown=False):
    """Grava o CSV por pacote em um caminho ou num arquivo já aberto."""
    if hasattr(destino, "write"):
        csv.writer(destino, lineterminator="\n").writerows(linhas_csv(records, breakdown))
        return destino
    destino = Path(destino)
    with destino.open("w", newline="", encoding="utf-8") as arquivo:
        csv.writer(arquivo, lineterminator="\n").writerows(linhas_csv(records, breakdown))
    return destino


def read_csv(origem):
    """Lê um CSV gravado por write_csv de volta para PacketRecord."""

    def _valor(texto):
        return float(texto) if texto != "" else None

    with Path(origem).open(newline="", encoding="utf-8") as arquivo:
        registros = []
        for linha in csv.DictReader(arquivo):
            registros.append(
                PacketRecord(
                    index=int(linha["index"]),
                    sent_at=_valor(linha["sent_ms"]),
                    received_at=_valor(linha["recv_ms"]),
                    latency=_valor(linha["latency_ms"]),
                    status=linha["status"],
                    mesh_ms=_valor(linha.get("mesh_ms", "")),
                    bridge_ms=_valor(linha.get("bridge_ms", "")),
                    link_ms=_valor(linha.get("link_ms", "")),
                )
            )
    return registros


def format_summary(relatorio, titulo=""):
    cabecalho = f"{titulo}: " if titulo else ""
    if relatorio.zero_delivered:
        return f"{cabecalho}nenhum pacote entregue; PDR 0.00% ({relatorio.delivered}/{relatorio.sent})"
    return (
        f"{cabecalho}mean={relatorio.mean_latency:.3f} ms stddev={relatorio.stddev:.3f} ms "
        f"PDR={relatorio.pdr:.2f}% ({relatorio.delivered}/{relatorio.sent})"
    )


def aggregate_pdr(relatorios):
    """PDR agregado de várias execuções com intervalo de Wilson de 95%."""
    enviados = sum(r.sent for r in relatorios)
    entregues = sum(r.delivered for r in relatorios)
    baixo, alto = wilson(entregues, enviados)
    por_execucao = np.array([r.pdr for r in relatorios], dtype=float)
    return {
        "execucoes": len(relatorios),
        "enviados": enviados,
        "entregues": entregues,
        "pdr": 100.0 * entregues / enviados,
        "ic_baixo": 100.0 * baixo,
        "ic_alto": 100.0 * alto,
        "pdr_mediana": float(np.median(por_execucao)),
    }


def format_aggregate(agregado):
    return (
        f"{agregado['execucoes']} execuções: PDR={agregado['pdr']:.2f}% "
        f"(IC 95% {agregado['ic_baixo']:.2f}-{agregado['ic_alto']:.2f}%, "
        f"mediana {agregado['pdr_mediana']:.2f}%, {agregado['entregues']}/{agregado['enviados']})"
    )
