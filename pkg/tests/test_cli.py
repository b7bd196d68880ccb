import json
from pathlib import Path

import pytest

from wahtor.cli import EXIT_CONFIG, EXIT_OK, main
from wahtor.config import load_config, parse_kv_file
from wahtor.errors import ConfigError

SMALL_RUN = """
# tiny system so the full pipeline stays fast
system.type = hubbard
system.sites = 2
system.t = 1.0
system.v = 4.0
system.mu = 2.0
ansatz.blocks = 3
strategy.list = na_newton, na_trust_region
vqe.seed = 7
wahtor.max_outer = 3
output.dir = {out}
"""


def write_config(tmp_path: Path, text: str) -> Path:
    path = tmp_path / "exp.conf"
    path.write_text(text)
    return path


def test_parse_kv_rejects_bad_lines():
    with pytest.raises(ConfigError) as err:
        parse_kv_file("system.type hubbard\n")
    assert "line 1" in str(err.value)
    with pytest.raises(ConfigError) as err:
        parse_kv_file("a = 1\na = 2\n")
    assert "duplicate" in str(err.value)


def test_load_config_validates_strategies(tmp_path):
    path = write_config(
        tmp_path, "system.type = hubbard\nstrategy.list = na_newton, bogus\n"
    )
    with pytest.raises(ConfigError):
        load_config(path)


def test_empty_strategy_list_is_config_error(tmp_path):
    path = write_config(tmp_path, "system.type = hubbard\nstrategy.list = ,\n")
    with pytest.raises(ConfigError):
        load_config(path)
    # and through the CLI it maps to the config exit code
    assert main(["run", str(path)]) == EXIT_CONFIG


def test_unknown_keys_rejected(tmp_path):
    path = write_config(
        tmp_path,
        "system.type = hubbard\nstrategy.list = na_newton\nwahtor.typo = 3\n",
    )
    with pytest.raises(ConfigError) as err:
        load_config(path)
    assert "wahtor.typo" in str(err.value)


def test_run_writes_outputs_and_is_reproducible(tmp_path):
    out = tmp_path / "results"
    path = write_config(tmp_path, SMALL_RUN.format(out=out))
    assert main(["run", str(path)]) == EXIT_OK

    assert (out / "trace_na_newton.csv").is_file()
    assert (out / "trace_na_trust_region.csv").is_file()
    assert (out / "plot.svg").is_file()
    summary = json.loads((out / "summary.json").read_text())
    exact = summary["exact_ground_energy_global"]
    for kind, data in summary["strategies"].items():
        assert data["final_energy"] >= exact - 1e-8

    first = (out / "trace_na_newton.csv").read_bytes()
    # re-run into a second directory: byte-identical CSVs
    out2 = tmp_path / "results2"
    path2 = write_config(tmp_path, SMALL_RUN.format(out=out2))
    assert main(["run", str(path2)]) == EXIT_OK
    assert (out2 / "trace_na_newton.csv").read_bytes() == first

    rows = first.decode().strip().splitlines()
    assert rows[0] == "strategy,outer_index,stage,cumulative_pauli_evals,energy_hartree,hamiltonian_word_count"
    counts = [int(r.split(",")[3]) for r in rows[1:]]
    assert counts == sorted(counts)


def test_threaded_strategies_reproduce_sequential(tmp_path, monkeypatch):
    out_seq = tmp_path / "seq"
    path = write_config(tmp_path, SMALL_RUN.format(out=out_seq))
    assert main(["run", str(path)]) == EXIT_OK

    monkeypatch.setenv("WAHTOR_THREADS", "2")
    out_par = tmp_path / "par"
    path2 = write_config(tmp_path, SMALL_RUN.format(out=out_par))
    assert main(["run", str(path2)]) == EXIT_OK
    for name in ("trace_na_newton.csv", "trace_na_trust_region.csv"):
        assert (out_par / name).read_bytes() == (out_seq / name).read_bytes()


def test_run_writes_operator_dump(tmp_path):
    out = tmp_path / "dump"
    path = write_config(tmp_path, SMALL_RUN.format(out=out))
    assert main(["run", str(path)]) == EXIT_OK
    from wahtor.pauli import from_text

    op = from_text((out / "hamiltonian_na_newton.txt").read_text())
    assert op.n_qubits == 4
    assert len(op.terms) > 0


def test_exact_command(tmp_path, capsys):
    out = tmp_path / "r"
    path = write_config(tmp_path, SMALL_RUN.format(out=out))
    assert main(["exact", str(path)]) == EXIT_OK
    captured = capsys.readouterr().out
    assert "ground energy" in captured


def test_validate_command_passes():
    assert main(["validate", "--seed", "0"]) == EXIT_OK
    assert main(["validate", "--seed", "1"]) == EXIT_OK


def test_partial_results_flushed_on_strategy_failure(tmp_path, monkeypatch):
    import wahtor.cli as cli

    real_run = cli.run_wahtor

    def sabotaged(ham, ansatz, gens, cfg, seed, **kwargs):
        if cfg.kind == "na_trust_region":
            raise RuntimeError("injected failure")
        return real_run(ham, ansatz, gens, cfg, seed, **kwargs)

    monkeypatch.setattr(cli, "run_wahtor", sabotaged)
    out = tmp_path / "partial"
    path = write_config(tmp_path, SMALL_RUN.format(out=out))
    assert main(["run", str(path)]) == 3  # runtime failure exit code
    # the surviving strategy's results were still written
    assert (out / "trace_na_newton.csv").is_file()
    assert not (out / "trace_na_trust_region.csv").exists()
    summary = json.loads((out / "summary.json").read_text())
    assert "error" in summary["strategies"]["na_trust_region"]
    assert "final_energy" in summary["strategies"]["na_newton"]


def test_missing_fcidump_path(tmp_path):
    path = write_config(
        tmp_path, "system.type = fcidump\nstrategy.list = na_newton\n"
    )
    assert main(["run", str(path)]) == EXIT_CONFIG


def test_fcidump_system_pipeline(tmp_path):
    # a 2-spatial-orbital hydrogen-like FCIDUMP exercises the molecular path
    fcid = tmp_path / "tiny.fcidump"
    fcid.write_text(
        "&FCI NORB=2,NELEC=2,MS2=0,\n ORBSYM=1,1,\n ISYM=1,\n&END\n"
        " 0.6744 1 1 1 1\n 0.6634 2 2 1 1\n 0.6973 2 2 2 2\n 0.1813 2 1 2 1\n"
        " -1.2524 1 1 0 0\n -0.4759 2 2 0 0\n 0.7137 0 0 0 0\n"
    )
    out = tmp_path / "mol"
    config = (
        f"system.type = fcidump\nsystem.fcidump = {fcid}\n"
        "ansatz.blocks = 2\nstrategy.list = na_newton\nvqe.seed = 3\n"
        f"wahtor.max_outer = 2\noutput.dir = {out}\n"
    )
    path = write_config(tmp_path, config)
    assert main(["run", str(path)]) == EXIT_OK
    summary = json.loads((out / "summary.json").read_text())
    assert summary["strategies"]["na_newton"]["final_energy"] >= summary["exact_ground_energy_global"] - 1e-8
