"""Modelo de tempo do transporte mesh (valores em ms)."""
import math

from mesh_transport.constants import CUSTO_TRANSMISSAO_MS, T_COUNT_UNICAST


def avg_tx_time(cfg, n_segments, t_count=None):
    """Tempo médio para transmitir N segmentos: (10 + (T_int + 10) * T_count) * N."""
    if n_segments < 1:
        raise ValueError(f"n_segments deve ser >= 1, recebido {n_segments}")
    if t_count is None:
        t_count = cfg.t_count if cfg.t_count is not None else T_COUNT_UNICAST
    return (CUSTO_TRANSMISSAO_MS + (cfg.t_int_ms + CUSTO_TRANSMISSAO_MS) * t_count) * n_segments


def seg_interval(step):
    """Intervalo entre segmentos: (step + 1) * 10."""
    if step < 0:
        raise ValueError(f"step deve ser >= 0, recebido {step}")
    return (step + 1) * 10


def segment_count(cfg, payload_len):
    if payload_len <= cfg.unsegmented_max:
        return 1
    return math.ceil(payload_len / cfg.mesh_seg_payload)


def segment_spacing(cfg, grupo=False):
    """Espaçamento entre inícios de transmissão de segmentos consecutivos."""
    return max(seg_interval(cfg.tx_seg_int_step), avg_tx_time(cfg, 1, cfg.t_count_para(grupo)))
