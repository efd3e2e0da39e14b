"""Shared fixtures and the acceptance-summary reporter.

Acceptance tests register one line per criterion through ``acceptance``;
the terminal summary prints them after the run so the gate is readable
at a glance.
"""

import os
from pathlib import Path

import pytest

import skg

_ACCEPTANCE: dict[str, tuple[str, str]] = {}


def _record(name: str, status: str, detail: str = "") -> None:
    _ACCEPTANCE[name] = (status, detail)


class AcceptanceRecorder:
    """Collects per-criterion outcomes; `check` records and asserts."""

    def check(self, name: str, condition: bool, detail: str = "") -> None:
        _record(name, "PASS" if condition else "FAIL", detail)
        assert condition, f"{name}: {detail}"

    def skip(self, name: str, reason: str) -> None:
        _record(name, "SKIP", reason)
        pytest.skip(reason)


@pytest.fixture
def acceptance() -> AcceptanceRecorder:
    return AcceptanceRecorder()


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_ACCEPTANCE):
        status, detail = _ACCEPTANCE[name]
        suffix = f"  ({detail})" if detail else ""
        terminalreporter.write_line(f"{status:4s} {name}{suffix}")


def data_dir() -> Path:
    return Path(os.environ.get("SKG_DATA_DIR", Path(__file__).resolve().parent.parent / "data"))


def require_data(*relative_paths) -> list[Path]:
    """Paths of user-fetched dataset files, skipping when they are absent."""
    paths = [data_dir() / rel for rel in relative_paths]
    missing = [str(p) for p in paths if not p.exists()]
    if missing:
        pytest.skip(
            "user-fetched dataset files not installed: "
            + ", ".join(missing)
            + " (see README, 'Reproducing the benchmark datasets')"
        )
    return paths


@pytest.fixture(scope="session")
def planted_acceptance_dataset():
    """The 200-node five-community dataset used by the sweep acceptance check."""
    return skg.planted_community_dataset(
        n_nodes=200, n_communities=5, p_in=0.8, p_out=0.05, value_noise=0.02, seed=42
    )


@pytest.fixture(scope="session")
def planted_small_dataset():
    """83-node two-community dataset; 40% sampling and 3 epochs give T=99."""
    return skg.planted_community_dataset(
        n_nodes=83, n_communities=2, p_in=0.8, p_out=0.05, value_noise=0.02, seed=7
    )


@pytest.fixture
def tiny_dataset_files(tmp_path):
    """A small planted dataset written out as edge/value CSVs for CLI runs."""
    ds = skg.planted_community_dataset(n_nodes=40, n_communities=2, seed=3)
    edges = tmp_path / "edges.csv"
    values = tmp_path / "values.csv"
    with open(edges, "w") as handle:
        handle.write("# planted community graph\n")
        for src, dst, _ in ds.graph.edges:
            handle.write(f"{src},{dst}\n")
    with open(values, "w") as handle:
        for node, value in ds.values.items():
            handle.write(f"{node},{value!r}\n")
    return edges, values
