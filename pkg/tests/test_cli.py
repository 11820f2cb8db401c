"""
Tests for the command-line entry point
"""
import json
import logging
from fractions import Fraction

import pytest

import cli
from action import FormalBV, act_multiple, onshell_context
from exactmath import AlgebraSpec, format_rat, g
from model_context import ContextFactory
from partitions import BetheIndex


@pytest.fixture(autouse=True)
def isolated_logging(monkeypatch, tmp_path):
    monkeypatch.setenv("BETHE_LOG_DIR", str(tmp_path / "logs"))
    logger = logging.getLogger("bethe")
    saved = list(logger.handlers)
    logger.handlers = []
    yield
    for handler in logger.handlers:
        handler.close()
    logger.handlers = saved


def run(capsys, *argv):
    code = cli.main(list(argv))
    return code, json.loads(capsys.readouterr().out)


class TestCommands:
    def test_izergin_of_empty_sets(self, capsys):
        assert run(capsys, "izergin", "--y", "[]", "--x", "[]") == (0, {"K": "1"})

    def test_hc(self, capsys):
        code, data = run(capsys, "hc", "--x", '[["3"]]', "--t", '[["1"]]')
        assert code == 0
        assert data == {"algebra": "gl(2)", "selector": "first-level", "c": "1", "Z": "-1/2"}

    def test_hc_graded(self, capsys):
        code, data = run(capsys, "hc", "--graded", "1,1", "--x", '[["5/7"]]', "--t", '[["1/3"]]')
        assert code == 0
        assert data["algebra"] == "gl(1|1)"
        assert data["Z"] == format_rat(g(Fraction(5, 7), Fraction(1, 3)))

    def test_sumformula_one_magnon(self, capsys):
        code, data = run(capsys, "sumformula", "--seed", "9", "--x", '["5/7"]', "--t", '["1/3"]')
        ctx = ContextFactory.get_context("free", AlgebraSpec.gl(2), seed=9)
        x, t = Fraction(5, 7), Fraction(1, 3)
        assert code == 0
        assert data["S"] == format_rat(g(t, x) * (ctx.alpha(1, x) - ctx.alpha(1, t)))
        assert data["context"]["seed"] == 9

    def test_action_creates_from_vacuum(self, capsys):
        code, data = run(capsys, "action", "--seed", "1", "--i", "1", "--j", "2", "--z", '["5/7"]', "--t", "[[]]")
        ctx = ContextFactory.get_context("free", AlgebraSpec.gl(2), seed=1)
        assert code == 0
        assert data["operator"] == "T_1,2"
        assert data["vector"] == "B({})"
        assert data["result"] == {"B({5/7})": format_rat(ctx.lam(2, Fraction(5, 7)))}

    def test_verify_kernels(self, capsys):
        code, data = run(capsys, "verify", "--suite", "kernels")
        assert code == 0
        assert data["passed"] is True
        assert data["summary"]["failed"] == 0

    def test_chain_oracle(self, capsys):
        code, data = run(capsys, "chain-oracle", "--algebra", "2,0", "--sites", "2")
        assert code == 0
        assert data["suite"] == "chain-oracle"
        assert data["summary"]["total"] > 0


class TestModelOptions:
    def test_on_shell_action(self, capsys):
        z, t = Fraction(5, 7), BetheIndex.of([Fraction(1, 3)])
        code, data = run(capsys, "action", "--seed", "1", "--mode", "on-shell", "--i", "2", "--j", "2",
                         "--z", '["5/7"]', "--t", '[["1/3"]]')
        free = ContextFactory.get_context("free", AlgebraSpec.gl(2), seed=1)
        expected = act_multiple(onshell_context(free, t), 2, 2, [z], FormalBV(t))
        assert code == 0
        assert data["context"]["mode"] == "on-shell"
        assert data["result"] == expected.to_dict()

    def test_generalized_sumformula(self, capsys):
        """With alpha vanishing on t only the term weighted by alpha(x) survives."""
        code, data = run(capsys, "sumformula", "--seed", "9", "--mode", "generalized",
                         "--x", '["5/7"]', "--t", '["1/3"]')
        ctx = ContextFactory.get_context("free", AlgebraSpec.gl(2), seed=9)
        x, t = Fraction(5, 7), Fraction(1, 3)
        assert code == 0
        assert data["context"]["mode"] == "generalized"
        assert data["S"] == format_rat(g(t, x) * ctx.alpha(1, x))

    def test_gamma_profile(self, capsys):
        code, data = run(capsys, "sumformula", "--graded", "1,1", "--gamma-profile", "swapped",
                         "--x", '["5/7"]', "--t", '["1/3"]')
        assert code == 0
        assert data["context"]["gamma_profile"] == "swapped"

    @pytest.mark.parametrize("argv", [["--mode", "dynamic"], ["--profile", "swapped"]])
    def test_rejected_options(self, argv):
        with pytest.raises(SystemExit):
            cli.main(["sumformula", "--x", '["5/7"]', "--t", '["1/3"]'] + argv)


class TestErrors:
    def test_invalid_rational_in_values(self, capsys):
        code, data = run(capsys, "hc", "--x", '[["a"]]', "--t", '[["1"]]')
        assert code == 2
        assert "Invalid rational" in data["error"]

    def test_invalid_constant_is_rejected_by_the_parser(self):
        with pytest.raises(SystemExit):
            cli.main(["izergin", "--y", "[]", "--x", "[]", "--c", "x/y"])

    def test_index_of_wrong_size(self, capsys):
        code, data = run(capsys, "action", "--N", "2", "--i", "1", "--j", "2", "--z", '["5/7"]', "--t", "[[]]")
        assert code == 2
        assert "levels" in data["error"]

    def test_log_file_written(self, capsys, tmp_path):
        run(capsys, "hc", "--x", '[["a"]]', "--t", '[["1"]]')
        assert (tmp_path / "logs" / "bethe.log").exists()
