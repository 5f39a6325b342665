"""Domain, sampling, variant expansion, and CSV/domain-file ingestion."""

import numpy as np
import pytest

from fairprobe import (
    BoundError,
    DomainError,
    InputDomain,
    ParameterSpec,
    ParseError,
    SchemaError,
    format_domain,
    load_csv,
    load_domain,
    parse_domain,
    protected_variants,
    sample_uniform,
    save_domain,
    write_csv,
)
from conftest import make_domain


class TestParameterSpec:
    def test_min_above_max_rejected(self):
        with pytest.raises(DomainError):
            ParameterSpec(name="x", index=0, min_value=3, max_value=2)

    def test_empty_name_rejected(self):
        with pytest.raises(DomainError):
            ParameterSpec(name="", index=0, min_value=0, max_value=1)

    def test_size(self):
        assert ParameterSpec("x", 0, -2, 2).size == 5


class TestInputDomain:
    def test_needs_protected_and_free(self):
        with pytest.raises(DomainError):
            make_domain([("a", 0, 1, False)])
        with pytest.raises(DomainError):
            make_domain([("g", 0, 1, True)])

    def test_duplicate_names_rejected(self):
        with pytest.raises(DomainError):
            make_domain([("a", 0, 1, False), ("a", 0, 1, True)])

    def test_index_gaps_rejected(self):
        with pytest.raises(DomainError):
            InputDomain(
                [
                    ParameterSpec("a", 0, 0, 1, False),
                    ParameterSpec("g", 2, 0, 1, True),
                ]
            )

    def test_cardinality(self, small_domain):
        assert small_domain.cardinality == 5 * 5 * 2
        assert small_domain.free_cardinality == 25
        assert small_domain.protected_cardinality == 2

    def test_bounds_check(self, small_domain):
        small_domain.check_bounds((0, 4, 1))
        with pytest.raises(BoundError):
            small_domain.check_bounds((0, 5, 1))
        with pytest.raises(BoundError):
            small_domain.check_bounds((0, 4))


class TestSampleUniform:
    def test_singleton_range_always_that_value(self):
        domain = make_domain([("a", 5, 5, False), ("g", 0, 1, True)])
        rng = np.random.default_rng(0)
        assert all(sample_uniform(domain, rng)[0] == 5 for _ in range(50))

    def test_frequencies_uniform_on_2x2(self):
        # 4-point free space x binary protected: marginalizing out the
        # protected value, each of the 2x2 free points must appear with
        # frequency 0.25 +- 0.01 over 1e5 draws.
        domain = make_domain([("a", 0, 1, False), ("b", 0, 1, False), ("g", 0, 1, True)])
        rng = np.random.default_rng(7)
        counts = {}
        n = 10**5
        for _ in range(n):
            v = sample_uniform(domain, rng)
            counts[v[:2]] = counts.get(v[:2], 0) + 1
        assert set(counts) == {(0, 0), (0, 1), (1, 0), (1, 1)}
        for point, count in counts.items():
            assert abs(count / n - 0.25) <= 0.01, point

    def test_fixed_seed_reproduces_sequence(self, small_domain):
        first = [sample_uniform(small_domain, np.random.default_rng(42)) for _ in range(1)]
        runs = []
        for _ in range(2):
            rng = np.random.default_rng(42)
            runs.append([sample_uniform(small_domain, rng) for _ in range(100)])
        assert runs[0] == runs[1]
        assert runs[0][0] == first[0]

    def test_samples_respect_bounds_on_random_domains(self):
        # 20 random domains x 5000 draws each (1e5 total): never out of bounds.
        meta = np.random.default_rng(123)
        for _ in range(20):
            n_params = int(meta.integers(2, 6))
            specs = []
            for i in range(n_params):
                lo = int(meta.integers(-50, 50))
                hi = lo + int(meta.integers(0, 100))
                specs.append((f"p{i}", lo, hi, False))
            specs[-1] = (specs[-1][0], specs[-1][1], specs[-1][2], True)
            domain = make_domain(specs)
            rng = np.random.default_rng(int(meta.integers(0, 2**31)))
            for _ in range(5000):
                assert domain.contains(sample_uniform(domain, rng))


class TestProtectedVariants:
    def test_binary_protected(self, small_domain):
        variants = protected_variants((2, 3, 0), small_domain)
        assert variants == [(2, 3, 0), (2, 3, 1)]

    def test_two_protected_product_count(self):
        domain = make_domain(
            [("a", 0, 9, False), ("g", 0, 1, True), ("h", 1, 3, True)]
        )
        variants = protected_variants((4, 1, 2), domain)
        assert len(variants) == 2 * 3
        assert variants == [
            (4, 0, 1), (4, 0, 2), (4, 0, 3), (4, 1, 1), (4, 1, 2), (4, 1, 3),
        ]

    def test_zero_width_protected_plus_binary(self):
        # Hand enumeration: the [1,1] protected parameter contributes one
        # value, the binary one two, so exactly 2 variants.
        domain = make_domain(
            [("a", 0, 4, False), ("fixed", 1, 1, True), ("g", 0, 1, True)]
        )
        variants = protected_variants((3, 1, 0), domain)
        assert variants == [(3, 1, 0), (3, 1, 1)]

    def test_original_included_and_free_params_agree(self, small_domain):
        original = (1, 4, 1)
        variants = protected_variants(original, small_domain)
        assert original in variants
        for v in variants:
            assert v[:2] == original[:2]

    def test_closed_under_protected_changes(self, small_domain):
        base = protected_variants((2, 2, 0), small_domain)
        for member in base:
            assert protected_variants(member, small_domain) == base


class TestCsv:
    def _write(self, tmp_path, text):
        path = tmp_path / "data.csv"
        path.write_text(text)
        return str(path)

    def test_three_row_parse(self, small_domain, tmp_path):
        path = self._write(tmp_path, "a,b,g,label\n0,1,0,1\n2,3,1,-1\n4,4,0,1\n")
        ds = load_csv(path, small_domain, "label")
        assert len(ds) == 3
        assert ds.rows[1] == ((2, 3, 1), -1)

    def test_out_of_range_cell_is_bound_error(self, tmp_path):
        domain = make_domain([("a", 0, 9, False), ("g", 0, 1, True)])
        path = self._write(tmp_path, "a,g,label\n10,0,1\n")
        with pytest.raises(BoundError, match="row 2.*'a'"):
            load_csv(path, domain, "label")

    def test_shuffled_columns_equal_index_order(self, small_domain, tmp_path):
        rng = np.random.default_rng(5)
        rows = [
            (int(rng.integers(0, 5)), int(rng.integers(0, 5)), int(rng.integers(0, 2)),
             int(rng.choice([-1, 1])))
            for _ in range(10)
        ]
        ordered = "a,b,g,label\n" + "\n".join(
            f"{a},{b},{g},{y}" for a, b, g, y in rows
        )
        shuffled = "label,g,a,b\n" + "\n".join(
            f"{y},{g},{a},{b}" for a, b, g, y in rows
        )
        ds1 = load_csv(self._write(tmp_path, ordered), small_domain, "label")
        path2 = tmp_path / "shuffled.csv"
        path2.write_text(shuffled)
        ds2 = load_csv(str(path2), small_domain, "label")
        assert ds1.rows == ds2.rows

    def test_missing_column_names_it(self, small_domain, tmp_path):
        path = self._write(tmp_path, "a,g,label\n0,0,1\n")
        with pytest.raises(SchemaError, match="'b'"):
            load_csv(path, small_domain, "label")

    def test_non_integer_cell_reports_row(self, small_domain, tmp_path):
        path = self._write(tmp_path, "a,b,g,label\n0,1,0,1\n2,x,1,-1\n")
        with pytest.raises(ParseError, match="row 3"):
            load_csv(path, small_domain, "label")

    def test_round_trip_preserves_numeric_content(self, small_domain, tmp_path):
        path = self._write(tmp_path, "a,b,g,label\n0,1,0,1\n2,3,1,-1\n")
        ds = load_csv(path, small_domain, "label")
        out = tmp_path / "out.csv"
        write_csv(ds, str(out), "label")
        ds2 = load_csv(str(out), small_domain, "label")
        assert ds.rows == ds2.rows


class TestDomainFile:
    TEXT = (
        "# two free parameters, one protected\n"
        "name: a\nmin: 0\nmax: 4\nprotected: false\n\n"
        "name: b\nmin: 0\nmax: 4\nprotected: false\n\n"
        "name: g\nmin: 0\nmax: 1\nprotected: true\n"
    )

    def test_parse(self):
        domain = parse_domain(self.TEXT)
        assert domain.n == 3
        assert domain.protected_indices == (2,)
        assert domain.params[0].max_value == 4

    def test_round_trip(self, small_domain, tmp_path):
        path = tmp_path / "domain.txt"
        save_domain(small_domain, str(path))
        assert load_domain(str(path)) == small_domain
        assert parse_domain(format_domain(small_domain)) == small_domain

    def test_missing_key_rejected(self):
        with pytest.raises(SchemaError, match="missing"):
            parse_domain("name: a\nmin: 0\nprotected: false\n")

    def test_unknown_key_rejected(self):
        with pytest.raises(SchemaError, match="unknown"):
            parse_domain("name: a\nmin: 0\nmax: 1\nprotected: false\nstep: 2\n")

    def test_bad_flag_rejected(self):
        with pytest.raises(ParseError):
            parse_domain("name: a\nmin: 0\nmax: 1\nprotected: yes\n")
