import numpy as np
import pytest

from irgc.model_io import ModelFormatError, format_model, parse_model, read_model, write_model
from irgc.mrf_model import energy
from irgc.synthetic import DEFAULT_PRIORS, random_grid_model, two_node_example


def test_minimal_file():
    model = parse_model("1 2 CONVEX_LINEAR\n3 7\n")
    assert model.unary.tolist() == [[3.0, 7.0]]
    assert model.edge_count == 0


def test_comments_and_blank_lines():
    text = "# two nodes\n2 2 TRUNCATED_LINEAR 1\n\n0 1  # node 0\n1 0\n0 1 2.5\n"
    model = parse_model(text)
    assert model.edges.tolist() == [[0, 1]]
    assert model.gamma.tolist() == [2.5]


@pytest.mark.parametrize("kind", sorted(DEFAULT_PRIORS))
def test_round_trip_energies(tmp_path, kind):
    rng = np.random.default_rng(0)
    model = random_grid_model(seed=4, prior=kind, width=3, height=3, num_labels=5,
                              gamma=lambda e: rng.uniform(0, 3, len(e)))
    write_model(model, tmp_path / "m.txt")
    back = read_model(tmp_path / "m.txt")
    assert back.prior.spec == model.prior.spec
    for _ in range(50):
        x = rng.integers(0, 5, model.node_count)
        assert energy(back, x) == energy(model, x)


def test_format_is_stable():
    text = format_model(two_node_example())
    assert format_model(parse_model(text)) == text


@pytest.mark.parametrize(
    "text, line",
    [
        ("2 2 CONVEX_LINEAR\n0 1\n1 0\n0 2 1\n", 4),
        ("2 2 CONVEX_LINEAR\n0 1\n1 0 5\n", 3),
        ("2 2 NOPE\n0 1\n1 0\n", 1),
        ("2 2 TRUNCATED_LINEAR\n0 1\n1 0\n", 1),
        ("2 2 CONVEX_LINEAR\n0 1\n1 x\n", 3),
        ("2 2 CONVEX_LINEAR\n0 1\n1 0\n0 1 -1\n", 4),
        ("2 2 CONVEX_LINEAR\n0 1\n1 0\n1 1 1\n", 4),
        ("3 2 CONVEX_LINEAR\n0 1\n\n1 0\n", 4),
    ],
)
def test_errors_carry_line_numbers(text, line):
    with pytest.raises(ModelFormatError) as info:
        parse_model(text)
    assert info.value.line == line
    assert str(info.value).startswith(f"line {line}:")
