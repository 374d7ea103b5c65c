import os
import sys

import django
from django.conf import settings


def cli_main(argv=None):
    """
    Ponto de entrada do experimento fora do manage.py. Devolve o código de
    saída: 0 sucesso, 1 erro de configuração ou de E/S, 2 uso incorreto.
    """
    argv = list(sys.argv[1:] if argv is None else argv)
    if not settings.configured:
        os.environ.setdefault("DJANGO_SETTINGS_MODULE", "config.settings.local")
        django.setup()
    from experimento.management.commands.run_experiment import Command

    try:
        Command().run_from_argv(["manage.py", "run_experiment", *argv])
    except SystemExit as exc:
        if exc.code is None:
            return 0
        return exc.code if isinstance(exc.code, int) else 1
    return 0


if __name__ == "__main__":
    sys.exit(cli_main())
