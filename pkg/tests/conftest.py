import numpy as np
import pytest

from word2spike.corpus_io import EmbeddingSet


@pytest.fixture
def tiny_set():
    return EmbeddingSet(
        ("cat", "dog", "fox"),
        np.array(
            [
                [1.0, 0.2, -2.0, 0.1],
                [0.5, -1.5, 0.3, 0.0],
                [-0.4, 0.9, 0.0, 2.2],
            ]
        ),
    )


@pytest.fixture
def random_set():
    rng = np.random.default_rng(42)
    words = tuple(f"w{i:03d}" for i in range(100))
    return EmbeddingSet(words, rng.standard_normal((100, 16)))


def write_lines(path, lines):
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return str(path)
