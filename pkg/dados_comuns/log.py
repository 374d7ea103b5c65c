import logging

from dados_comuns.context import get_no, get_relogio


class SimTimeFilter(logging.Filter):
    """Acrescenta sim_time (segundos virtuais) e node aos registros."""

    def filter(self, record):
        relogio = get_relogio()
        if relogio is None:
            record.sim_time = "-"
        else:
            record.sim_time = f"{relogio.now_us() / 1_000_000:.6f}s"
        record.node = get_no() or "-"
        return True
