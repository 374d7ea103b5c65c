from pathlib import Path

from django.core.management.base import BaseCommand, CommandError

from experimento.constants import TAMANHO_MENSAGEM_PADRAO
from experimento.persistencia import registrar_execucao
from experimento.reports import aggregate_pdr, format_aggregate, format_summary, write_csv
from experimento.runner import run_experiment, run_many
from sim_network.exceptions import ScenarioConfigError
from sim_network.scenario import ScenarioConfig


def carregar_cenario(options):
    config = ScenarioConfig.load(options["scenario"], position=options.get("position"))
    ajustes = {
        "packet_count": options.get("packets"),
        "send_interval_s": options.get("interval_s"),
        "message_size_bytes": options.get("message_bytes"),
        "keep_alive_s": options.get("keep_alive_s"),
    }
    ajustes = {chave: valor for chave, valor in ajustes.items() if valor is not None}
    if options.get("strict_floodsub"):
        ajustes["strict_floodsub"] = True
    return config.com(**ajustes) if ajustes else config


def caminho_da_execucao(destino, numero):
    return destino.with_name(f"{destino.stem}_run{numero:02d}{destino.suffix or '.csv'}")


class Command(BaseCommand):
    help = "Executa o experimento de publicação sobre a pilha simulada e grava o CSV por pacote."

    def add_arguments(self, parser):
        parser.add_argument("--scenario", required=True, help="Arquivo de cenário (YAML)")
        parser.add_argument("--seed", type=int, default=None, help="Semente (padrão: a do cenário)")
        parser.add_argument("--packets", type=int, default=None, help="Pacotes publicados (padrão do cenário: 100)")
        parser.add_argument("--interval-s", type=float, default=None, help="Intervalo entre pacotes (padrão do cenário: 9)")
        parser.add_argument(
            "--message-bytes",
            type=int,
            default=TAMANHO_MENSAGEM_PADRAO,
            help=f"Tamanho da mensagem publicada (padrão: {TAMANHO_MENSAGEM_PADRAO}; a calibração dos cenários usa 584)",
        )
        parser.add_argument("--out", default=None, help="CSV de saída (padrão: <cenário>.csv)")
        parser.add_argument("--runs", type=int, default=1, help="Execuções com seeds consecutivas")
        parser.add_argument("--strict-floodsub", action="store_true", help="Repasse só a quem anunciou o tópico")
        parser.add_argument("--position", default=None, help="Posição nomeada do cenário")
        parser.add_argument("--keep-alive-s", type=float, default=None, help="Período do keep-alive; 0 desliga")
        parser.add_argument("--breakdown", action="store_true", help="Inclui mesh_ms, bridge_ms e link_ms no CSV")
        parser.add_argument("--persist", action="store_true", help="Grava as execuções no banco")

    def handle(self, *args, **options):
        if options["runs"] < 1:
            raise CommandError("--runs deve ser >= 1")
        try:
            config = carregar_cenario(options)
        except ScenarioConfigError as exc:
            raise CommandError(str(exc)) from exc

        seed = config.seed if options["seed"] is None else options["seed"]
        destino = Path(options["out"] or f"{Path(options['scenario']).stem}.csv")
        titulo = config.nome + (f"/{config.position}" if config.position else "")

        if options["runs"] == 1:
            resultados = [run_experiment(config, seed)]
            arquivos = [destino]
        else:
            seeds = [seed + k for k in range(options["runs"])]
            resultados = run_many(config, seeds)
            arquivos = [caminho_da_execucao(destino, k + 1) for k in range(options["runs"])]

        for resultado, arquivo in zip(resultados, arquivos):
            try:
                write_csv(resultado.records, arquivo, breakdown=options["breakdown"])
            except OSError as exc:
                raise CommandError(f"não foi possível gravar {arquivo}: {exc}") from exc
            self.stdout.write(format_summary(resultado.report, f"{titulo} seed {resultado.seed}"))
            if options["persist"]:
                registrar_execucao(resultado)

        if len(resultados) > 1:
            self.stdout.write(format_aggregate(aggregate_pdr([r.report for r in resultados])))
