import pytest

from ftleval import forge, harness
from ftleval.timeline import parse_timeline


@pytest.fixture(scope="session")
def default_result():
    return forge.forge(forge.default_scenario(seed=7, noise_rows=500))


@pytest.fixture(scope="session")
def default_timeline(default_result):
    return parse_timeline(default_result.csv_text)


@pytest.fixture(scope="session")
def forged_dir(tmp_path_factory, default_result, default_timeline):
    """Forge outputs on disk with the single-type truth added, ready for runs."""
    out = tmp_path_factory.mktemp("scenario")
    forge.write_forge_outputs(default_result, out)
    single = harness.gen_ground_truth(
        "summarize", default_timeline, event_type="last-shutdown"
    )
    for name, text in single.items():
        (out / "truth" / name).write_text(text, encoding="utf-8")
    return out
