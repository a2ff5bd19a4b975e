from collections.abc import Iterator
from pathlib import Path
from unittest.mock import patch

import pytest

from src.cli import run
from src.utils.config import Settings


@pytest.fixture(autouse=True)
def e2e_settings() -> Iterator[Settings]:
    """Pin settings so runs do not depend on the caller's environment."""
    cfg = Settings(_env_file=None, database_root=None, permutations=100)
    with patch("src.cli.get_settings", return_value=cfg):
        yield cfg


@pytest.fixture(scope="module")
def cli_db(tmp_path_factory: pytest.TempPathFactory) -> Path:
    """Six subjects, 12 leads, two 60 s sessions, written through the CLI."""
    root = tmp_path_factory.mktemp("cli_db")
    cfg = Settings(_env_file=None, database_root=None)
    args = ["synth", "--out", str(root), "--subjects", "6", "--duration", "60"]
    args += ["--leads", "12", "--sessions", "2", "--seed", "11"]
    with patch("src.cli.get_settings", return_value=cfg):
        assert run(args) == 0
    return root


@pytest.fixture(scope="module")
def drifting_db(tmp_path_factory: pytest.TempPathFactory) -> Path:
    """Six single-lead 4 minute records whose baseline drifts after 2 minutes."""
    root = tmp_path_factory.mktemp("drifting_db")
    cfg = Settings(_env_file=None, database_root=None)
    args = ["synth", "--out", str(root), "--subjects", "6", "--duration", "240"]
    args += ["--drift", "2", "--drift-onset", "120", "--seed", "11"]
    with patch("src.cli.get_settings", return_value=cfg):
        assert run(args) == 0
    return root
