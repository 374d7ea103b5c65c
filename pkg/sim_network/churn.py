import logging

from dados_comuns.utils import s_to_us
from sim_network.exceptions import ScenarioConfigError

logger = logging.getLogger(__name__)


def schedule_churn(sim, node, join_at=None, leave_at=None):
    """
    Agenda saída e/ou entrada de um nó (tempos em segundos virtuais).
    O nó precisa expor leave() e join().
    """
    if join_at is not None and leave_at is not None and join_at == leave_at:
        raise ScenarioConfigError(f"entrada e saída de {node.name} no mesmo instante")
    for instante in (join_at, leave_at):
        if instante is not None and s_to_us(instante) < sim.now_us():
            raise ScenarioConfigError(f"churn de {node.name} em {instante}s já passou")
    if leave_at is not None:
        sim.at(s_to_us(leave_at), node.leave)
        logger.info(f"Saída de {node.name} agendada para {leave_at}s")
    if join_at is not None:
        sim.at(s_to_us(join_at), node.join)
        logger.info(f"Entrada de {node.name} agendada para {join_at}s")
