import zlib

import numpy as np


def node_rng(seed, name):
    """Fluxo aleatório próprio do nó: acrescentar nós não muda os sorteios dos demais."""
    sequencia = np.random.SeedSequence(int(seed), spawn_key=(zlib.crc32(name.encode("utf-8")),))
    return np.random.default_rng(sequencia)
