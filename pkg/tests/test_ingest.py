import pytest
from hypothesis import given, strategies as st

from watson.errors import (
    CodebookMismatch,
    EmptyInput,
    EncodingError,
    RaggedRow,
    TooManyCategories,
)
from watson.ingest import (
    MISSING,
    apply_codebook,
    infer_schema,
    parse_csv,
    serialize_csv,
)


class TestParseCsv:
    def test_header_parse(self):
        rs = parse_csv("a,b\n1,x\n2,y")
        assert rs.column_names == ("a", "b")
        assert rs.rows == (("1", "x"), ("2", "y"))

    def test_empty_input(self):
        with pytest.raises(EmptyInput):
            parse_csv("")

    def test_no_header_synthesizes_names(self):
        rs = parse_csv("1,x\n2,y", has_header=False)
        assert rs.column_names == ("col1", "col2")
        assert rs.n_rows == 2

    def test_ragged_row_reports_index(self):
        with pytest.raises(RaggedRow) as err:
            parse_csv("a,b\n1,x\n2\n3,z")
        assert err.value.detail["row"] == 1

    def test_bad_utf8(self):
        with pytest.raises(EncodingError):
            parse_csv(b"a,b\n\xff\xfe,x")

    def test_quoted_cells(self):
        rs = parse_csv('a,b\n"x,1",y\n"he said ""hi""",z')
        assert rs.rows[0] == ("x,1", "y")
        assert rs.rows[1] == ('he said "hi"', "z")

    def test_alternate_delimiter(self):
        rs = parse_csv("a;b\n1;2", delimiter=";")
        assert rs.rows == (("1", "2"),)

    def test_header_only_is_valid(self):
        rs = parse_csv("a,b\n")
        assert rs.n_rows == 0
        assert rs.column_names == ("a", "b")


_cell = st.text(
    alphabet=st.characters(
        categories=("L", "N", "P", "Zs"), include_characters=',"\n'
    ),
    max_size=12,
)
_name = st.text(alphabet=st.characters(categories=("L",)), min_size=1, max_size=6)


@given(
    st.integers(min_value=1, max_value=4).flatmap(
        lambda width: st.tuples(
            st.lists(_name, min_size=width, max_size=width, unique=True),
            st.lists(
                st.lists(_cell, min_size=width, max_size=width),
                min_size=0, max_size=8,
            ),
        )
    )
)
def test_parse_serialize_roundtrip(data):
    header, rows = data
    from watson.ingest import RecordSet

    rs = RecordSet(
        column_names=tuple(header), rows=tuple(tuple(r) for r in rows)
    )
    again = parse_csv(serialize_csv(rs))
    assert again.column_names == rs.column_names
    assert again.rows == rs.rows


class TestInferSchema:
    def test_distinct_in_order(self):
        rs = parse_csv("v\nx\ny\nx\nz")
        schema = infer_schema(rs)
        assert schema.variables[0].categories == ("x", "y", "z")

    def test_too_many_categories_boundary(self):
        rows = "\n".join(str(i) for i in range(65))
        rs = parse_csv("v\n" + rows)
        infer_schema(rs, max_categories=65)
        with pytest.raises(TooManyCategories) as err:
            infer_schema(rs, max_categories=64)
        assert err.value.detail["variable"] == "v"

    def test_two_column_distinct_counts(self):
        # oracle: brute-force distinct count over a hand-written 10-row file
        text = (
            "sex,dept\n"
            "M,Eng\nF,Med\nM,Law\nF,Eng\nM,Med\n"
            "F,Law\nM,Eng\nF,Med\nM,Law\nF,Eng\n"
        )
        rs = parse_csv(text)
        schema = infer_schema(rs)
        for col, var in zip(range(2), schema.variables):
            expected = []
            for row in rs.rows:
                if row[col] not in expected:
                    expected.append(row[col])
            assert list(var.categories) == expected
        assert schema.variables[0].n_categories == 2
        assert schema.variables[1].n_categories == 3

    def test_missing_cells_become_category(self):
        rs = parse_csv("v,w\nx,1\n,2\ny,3")
        schema = infer_schema(rs)
        assert schema.variables[0].categories == ("x", MISSING, "y")

    def test_empty_recordset_rejected(self):
        rs = parse_csv("a,b\n")
        with pytest.raises(EmptyInput):
            infer_schema(rs)


class TestCodebook:
    def test_reorder_and_scores(self):
        rs = parse_csv("rank\nsecond\nfirst\nthird")
        schema = apply_codebook(
            infer_schema(rs),
            {"rank": {"order": ["first", "second", "third"], "scores": [1, 2, 3]}},
        )
        assert schema.variables[0].categories == ("first", "second", "third")
        assert schema.variables[0].scores == (1.0, 2.0, 3.0)

    def test_order_must_be_permutation(self):
        rs = parse_csv("rank\na\nb")
        with pytest.raises(CodebookMismatch):
            apply_codebook(infer_schema(rs), {"rank": {"order": ["a", "b", "c"]}})

    def test_unknown_variable_rejected(self):
        rs = parse_csv("rank\na\nb")
        with pytest.raises(CodebookMismatch):
            apply_codebook(infer_schema(rs), {"typo": {"order": ["a", "b"]}})

    def test_scores_without_order(self):
        rs = parse_csv("rank\na\nb")
        schema = apply_codebook(infer_schema(rs), {"rank": {"scores": [5, 7]}})
        assert schema.variables[0].scores == (5.0, 7.0)

    def test_score_length_mismatch(self):
        rs = parse_csv("rank\na\nb")
        with pytest.raises(CodebookMismatch):
            apply_codebook(infer_schema(rs), {"rank": {"scores": [1]}})
