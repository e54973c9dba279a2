import pytest

from reqgrid.config import parse_config
from reqgrid.synthetic import write_synthetic_corpora


@pytest.fixture(scope="session")
def data_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("data")
    write_synthetic_corpora(out)
    return out


def make_config(data_dir, models=("m1",), embedding=(), **extra):
    raw = {
        "datasets": {
            "promise": str(data_dir / "promise.csv"),
            "functional_quality": str(data_dir / "functional_quality.csv"),
            "secreq": str(data_dir / "secreq.csv"),
        },
        "models": [{"alias": m, "backend": "mock", "seed": i} for i, m in enumerate(models)]
        + [{"alias": m, "backend": "mock", "pipeline": "embedding"} for m in embedding],
    }
    raw.update(extra)
    return parse_config(raw)


@pytest.fixture
def config_factory(data_dir):
    def factory(models=("m1",), embedding=(), **extra):
        return make_config(data_dir, models, embedding, **extra)
    return factory
