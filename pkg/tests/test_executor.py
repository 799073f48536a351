import random

import pytest

from helpers import magazine_table
from reference_impls import reference_execute
from sketchsql.executor import (ExecutionError, ResultSet, evaluate_dataset,
                                exec_equal, execute)
from sketchsql.sketch import SqlQuery
from sketchsql.tables import Table


def rows_table(rows, types=None, header=None):
    n = len(rows[0]) if rows else 1
    return Table(id="t", header=header or [f"c{i}" for i in range(n)],
                 types=types or ["text"] * n, rows=rows)


class TestExecute:
    def test_count_without_conditions(self):
        table = rows_table([[str(i)] for i in range(7)])
        out = execute(SqlQuery(agg=3, sel=0), table)
        assert out.kind == "scalar" and out.scalar == 7

    def test_case_insensitive_equality_filter(self):
        table = rows_table([["mort drucker", "a"], ["x", "b"], ["mort drucker", "c"]],
                           header=["artist", "issue"])
        q = SqlQuery(agg=3, sel=1, conds=[(0, 0, "Mort Drucker")])
        assert execute(q, table).scalar == 2

    def test_min_over_zero_rows_is_empty(self):
        table = rows_table([[1.0]], types=["real"])
        q = SqlQuery(agg=2, sel=0, conds=[(0, 1, "99")])
        assert execute(q, table).kind == "empty"

    def test_count_over_zero_rows_is_zero(self):
        table = rows_table([["a"]])
        q = SqlQuery(agg=3, sel=0, conds=[(0, 0, "nope")])
        assert execute(q, table).scalar == 0

    def test_null_agg_returns_multiset(self):
        table = magazine_table()
        q = SqlQuery(agg=0, sel=0, conds=[(1, 0, "mort drucker")])
        out = execute(q, table)
        assert out.kind == "rows"
        assert sorted(out.values) == ["star blecch", "star roars"]

    def test_numeric_equality_coerces(self):
        table = rows_table([[88.5]], types=["real"])
        q = SqlQuery(agg=3, sel=0, conds=[(0, 0, "88.50")])
        assert execute(q, table).scalar == 1

    def test_ordering_on_text_is_false(self):
        table = rows_table([["abc"], ["zzz"]])
        q = SqlQuery(agg=3, sel=0, conds=[(0, 1, "5")])
        assert execute(q, table).scalar == 0

    def test_sum_over_text_column_errors(self):
        table = rows_table([["abc"]])
        with pytest.raises(ExecutionError, match="non-numeric aggregate"):
            execute(SqlQuery(agg=4, sel=0), table)

    def test_avg(self):
        table = rows_table([[2.0], [4.0]], types=["real"])
        assert execute(SqlQuery(agg=5, sel=0), table).scalar == pytest.approx(3.0)

    def test_adding_condition_never_increases_count(self):
        table = magazine_table()
        base = execute(SqlQuery(agg=3, sel=0), table).scalar
        narrowed = execute(SqlQuery(agg=3, sel=0, conds=[(1, 0, "mort drucker")]), table).scalar
        tighter = execute(SqlQuery(agg=3, sel=0,
                                   conds=[(1, 0, "mort drucker"), (2, 1, "100")]), table).scalar
        assert base >= narrowed >= tighter


class TestExecEqual:
    def test_within_tolerance(self):
        a = ResultSet.of_scalar(3.0)
        b = ResultSet.of_scalar(3.0 + 1e-9)
        assert exec_equal(a, b)

    def test_multiset_multiplicity(self):
        assert not exec_equal(ResultSet.of_rows(["a", "a", "b"]), ResultSet.of_rows(["a", "b"]))
        assert exec_equal(ResultSet.of_rows(["b", "a"]), ResultSet.of_rows(["a", "b"]))

    def test_empty_only_equals_empty(self):
        assert exec_equal(ResultSet.empty(), ResultSet.empty())
        assert not exec_equal(ResultSet.empty(), ResultSet.of_rows([]))
        assert not exec_equal(ResultSet.empty(), ResultSet.of_scalar(0.0))

    def test_numeric_rows_compare_with_tolerance(self):
        assert exec_equal(ResultSet.of_rows([1.0, 2.0]), ResultSet.of_rows([2.0, 1.0 + 1e-9]))


def random_table(rnd: random.Random) -> Table:
    n_cols = rnd.randint(1, 5)
    types = [rnd.choice(["text", "real"]) for _ in range(n_cols)]
    header = [f"col {i}" if rnd.random() < 0.3 else f"c{i}" for i in range(n_cols)]
    words = ["alpha", "beta", "Gamma", "delta x", "epsilon", "42", ""]
    rows = []
    for _ in range(rnd.randint(0, 20)):
        row = []
        for kind in types:
            if kind == "real":
                row.append(rnd.choice([rnd.randint(-50, 50),
                                       round(rnd.uniform(-100, 100), 2)]))
            else:
                row.append(rnd.choice(words))
        rows.append(row)
    return Table(id="fuzz", header=header, types=types, rows=rows)


def random_query(rnd: random.Random, table: Table) -> SqlQuery:
    n_cols = table.n_columns
    sel = rnd.randrange(n_cols)
    # keep SUM/AVG on real columns so execution is well-defined
    if table.types[sel] == "real":
        agg = rnd.choice([0, 1, 2, 3, 4, 5])
    else:
        agg = rnd.choice([0, 1, 2, 3])
    conds = []
    for col in rnd.sample(range(n_cols), k=min(n_cols, rnd.randint(0, 4))):
        op = rnd.choice([0, 1, 2])
        if rnd.random() < 0.5 and table.rows:
            val = str(rnd.choice(table.rows)[col])
        else:
            val = rnd.choice(["alpha", "42", "-3.5", "zzz", "0"])
        conds.append((col, op, val))
    return SqlQuery(agg=agg, sel=sel, conds=conds)


def to_comparable(result: ResultSet):
    if result.kind == "rows":
        return ("rows", sorted(map(str, result.values)))
    if result.kind == "scalar":
        return ("scalar", result.scalar)
    return ("empty", None)


class TestAgainstReferenceInterpreter:
    def test_thousand_fuzzed_pairs_match(self):
        rnd = random.Random(20260810)
        for _ in range(1000):
            table = random_table(rnd)
            query = random_query(rnd, table)
            kind, payload = reference_execute(query, table)
            assert kind != "error"
            got = execute(query, table)
            if kind == "rows":
                assert to_comparable(got) == ("rows", sorted(map(str, payload)))
            elif kind == "scalar":
                assert got.kind == "scalar"
                if isinstance(payload, str):
                    assert got.scalar == payload
                else:
                    assert got.scalar == pytest.approx(payload, abs=1e-12)
            else:
                assert got.kind == "empty"

    def test_reflexivity_on_fuzzed_queries(self):
        rnd = random.Random(7)
        for _ in range(200):
            table = random_table(rnd)
            query = random_query(rnd, table)
            assert exec_equal(execute(query, table), execute(query, table))


class TestEvaluateDataset:
    def golds(self):
        table = magazine_table()
        golds = [
            SqlQuery(agg=0, sel=0, conds=[(1, 0, "mort drucker"), (2, 0, "88.5")]),
            SqlQuery(agg=3, sel=2, conds=[]),
        ]
        return golds, ["mag", "mag"], {"mag": table}

    def test_perfect_predictions(self):
        golds, ids, tables = self.golds()
        m = evaluate_dataset(golds, golds, ids, tables)
        assert m.to_dict() == {"n": 2, "acc_lf": 1.0, "acc_qm": 1.0, "acc_ex": 1.0,
                               "acc_agg": 1.0, "acc_sel": 1.0, "acc_where": 1.0}

    def test_reordered_conditions_break_lf_only(self):
        golds, ids, tables = self.golds()
        preds = [SqlQuery(agg=0, sel=0, conds=[(2, 0, "88.5"), (1, 0, "mort drucker")]),
                 golds[1]]
        m = evaluate_dataset(preds, golds, ids, tables)
        assert m.acc_qm == 1.0 and m.acc_where == 1.0 and m.acc_ex == 1.0
        assert m.acc_lf == 0.5

    def test_missing_table_reports_id(self):
        golds, ids, tables = self.golds()
        with pytest.raises(ValueError, match="nosuch"):
            evaluate_dataset(golds, golds, ["nosuch", "mag"], tables)

    def test_execution_error_counts_as_mismatch(self):
        table = magazine_table()
        gold = SqlQuery(agg=3, sel=0)
        pred = SqlQuery(agg=4, sel=0)  # SUM over text column fails
        m = evaluate_dataset([pred], [gold], ["mag"], {"mag": table})
        assert m.acc_ex == 0.0

    def test_metrics_empty_dataset(self):
        m = evaluate_dataset([], [], [], {})
        assert m.n == 0 and m.acc_qm == 0.0
