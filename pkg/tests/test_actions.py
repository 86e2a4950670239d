import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from querygym.actions import (
    ActionKind,
    catalog,
    parse_action,
    render_actions_help,
    spec_for,
)
from querygym.errors import (
    ArityError,
    JoinArityError,
    ParseError,
    QueryGymError,
    ShapeError,
    UnknownActionError,
)

# Every example invocation from the action catalog, verbatim.
CATALOG_EXAMPLES = [
    '["get_overview"]',
    '["get_query"]',
    '["get_schema"]',
    '["get_tables"]',
    '["get_columns", "T_0"]',
    '["get_columns", "frpm"]',
    '["get_actions"]',
    '["get_operations"]',
    '["preview_table", "`employee name` as emp"]',
    '["preview_table", "crime"]',
    '["get_column_stats", "`employee name` as emp",  "emp.address"]',
    '["get_column_stats", "crime", "crime.case_number"]',
    '["get_unique_values", "`employee name` as emp",  "emp.address"]',
    '["get_unique_values", "crime", "crime.case_number"]',
    '["get_column_types", "`employee name` as emp"]',
    '["get_column_types", "crime"]',
    '["get_sample_values", "employee", "employee.phone_number"]',
    '["get_sample_values", "Solution as T_1", "T_1.SolutionID"]',
    '["perform_projection", "T_0", "DISTINCT T_0.movie_title, T_0.movie_popularity"]',
    '["perform_projection", \'T_3\', "AVG(T_3.rating_score) as score"]',
    '["perform_projection", "employee", "employee.`home address`"]',
    '["perform_filter", "T_1", "T_1.list_creation_date_utc >= 2016-02-01 AND '
    'T_1.list_creation_date_utc <= 2016-02-29 AND T_1.user_eligible_for_trial = 1"]',
    '["perform_filter", "T_2", "T_2.movie_release_year = 2021 AND '
    "T_2.director_name = 'Steven Spielberg'\"]",
    '["perform_join", ["Table_0", "Table_1","Table_2"], '
    '["Table_0.column = Table_1.column AND Table_1.`planet name` == \'earth\'", '
    '"Table_1.`planet name` = Table_2.`planet name` and Table_2.solar_system = '
    '`Milky Way`"], ["INNER JOIN", "LEFT JOIN"], '
    "'(Table_1.`planet name` || \" \" || Table_2.solar_system) AS planet_location']",
    '["perform_join", ["job as T2", "job_details as T1"], ["T1.info = T2.info"], '
    '["INNER JOIN"], "T2.OfficeCoordinates"]',
    '["perform_order_by", "T_0", "(CAST(`Free Meal Count (K-12)` AS REAL) / '
    '`Enrollment (K-12)`) DESC"]',
    '["perform_order_by", "movies", "movie_popularity DESC NULLS LAST"]',
    '["perform_limit", "`employee name` as emp", "5"]',
    '["perform_limit", "T_0", "3"]',
    '["perform_aggregate", "movies", "director_name,  director_country", '
    '"director_name,  director_country", "COUNT(movies) > 3"]',
    '["perform_aggregate", "employee", "employee_id", "employee_id", '
    '"MAX(SUBSTR(list_creation_date_utc, 1, 4)) - '
    'MIN(SUBSTR(list_creation_date_utc, 1, 4)) >= 10"]',
    '["perform_union", "ALL",  "movies", "ratings", "movie.rating, movie.name", '
    '"ratings.movie_score, ratings.movie_title"]',
    '["perform_union", "DISTINCT",  "T_0", "T_2", "T_0.name", "T_2.reviews"]',
    '["perform_intersect", "movies", "ratings", "movie.rating, movie.name", '
    '"ratings.movie_score, ratings.movie_title"]',
    '["perform_intersect", "T_0", "T_2", "T_0.name", "T_2.reviews"]',
]


class TestCatalog:
    def test_order_starts_with_overview(self):
        assert catalog()[0].name == "get_overview"

    def test_split_12_8(self):
        kinds = [s.kind for s in catalog()]
        assert kinds.count(ActionKind.EXPLORATION) == 12
        assert kinds.count(ActionKind.RELATIONAL_ALGEBRA) == 8
        assert len(kinds) == 20

    def test_names_unique(self):
        names = [s.name for s in catalog()]
        assert len(set(names)) == 20


class TestParseExamples:
    @pytest.mark.parametrize("text", CATALOG_EXAMPLES)
    def test_catalog_example_parses(self, text):
        cmd = parse_action(text)
        assert spec_for(cmd.name) is not None

    @pytest.mark.parametrize("text", CATALOG_EXAMPLES)
    def test_round_trip(self, text):
        cmd = parse_action(text)
        # semantically equal: re-parse of the normalized array matches
        cmd2 = parse_action(repr(cmd.as_array()))
        assert cmd2.name == cmd.name
        assert cmd2.args == cmd.args

    def test_filter_example(self):
        cmd = parse_action(
            '["perform_filter", "T_2", "T_2.movie_release_year = 2021 AND '
            "T_2.director_name = 'Steven Spielberg'\"]")
        assert cmd.name == "perform_filter"
        assert len(cmd.args) == 2
        assert "Steven Spielberg" in cmd.args[1]

    def test_zero_arg_action(self):
        cmd = parse_action('["get_overview"]')
        assert cmd.name == "get_overview"
        assert cmd.args == ()

    def test_action_prefix_and_prose(self):
        cmd = parse_action(
            'I will join the tables now.\n'
            'Action: ["perform_join", ["job as T2", "job_details as T1"], '
            '["T1.info = T2.info"], ["INNER JOIN"], "T2.OfficeCoordinates"]')
        assert cmd.name == "perform_join"
        assert cmd.arg("tables") == ["job as T2", "job_details as T1"]
        assert cmd.arg("conditions") == ["T1.info = T2.info"]
        assert cmd.arg("join_types") == ["INNER JOIN"]
        assert cmd.arg("projected_columns") == "T2.OfficeCoordinates"

    def test_case_insensitive_name(self):
        assert parse_action('["GET_TABLES"]').name == "get_tables"


class TestParseErrors:
    def test_no_array(self):
        with pytest.raises(ParseError):
            parse_action("let me think about this")

    def test_unknown_action(self):
        with pytest.raises(UnknownActionError):
            parse_action('["do_magic", "x"]')

    def test_missing_required(self):
        with pytest.raises(ArityError) as exc:
            parse_action('["perform_limit", "t"]')
        assert exc.value.usage is not None

    def test_too_many_args(self):
        with pytest.raises(ArityError):
            parse_action('["get_tables", "x"]')

    def test_shape_error(self):
        with pytest.raises(ShapeError):
            parse_action('["perform_join", "not_a_list", ["c"], ["INNER JOIN"], "*"]')

    def test_join_arity(self):
        with pytest.raises(JoinArityError):
            parse_action('["perform_join", ["a","b","c"], ["a.x=b.x"], '
                         '["INNER JOIN","LEFT JOIN"], "*"]')

    def test_single_table_join(self):
        with pytest.raises(JoinArityError):
            parse_action('["perform_join", ["a"], [], [], "*"]')


class TestHelpRendering:
    def test_operations_filter(self):
        text = render_actions_help(ActionKind.RELATIONAL_ALGEBRA)
        assert "perform_union" in text
        assert "preview_table" not in text

    def test_all_names_present(self):
        text = render_actions_help()
        for spec in catalog():
            assert spec.name in text

    def test_usage_lines_verbatim(self):
        text = render_actions_help()
        for spec in catalog():
            assert spec.usage in text


@settings(max_examples=300, deadline=None)
@given(st.text(max_size=200))
def test_parser_is_total(text):
    # every input maps to a command or a specific error, never a crash
    try:
        parse_action(text)
    except QueryGymError:
        pass


@settings(max_examples=100, deadline=None)
@given(st.lists(st.text(alphabet=st.characters(blacklist_characters='"\\'),
                        max_size=20), max_size=5))
def test_parser_never_consults_schema(args):
    import json
    text = json.dumps(["preview_table"] + args)
    try:
        first = parse_action(text)
        second = parse_action(text)
        assert first.name == second.name and first.args == second.args
    except QueryGymError as exc:
        with pytest.raises(type(exc)):
            parse_action(text)
