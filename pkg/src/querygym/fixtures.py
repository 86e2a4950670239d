"""Bundled fixture dataset: two small SQLite databases, a dozen tasks in the
BIRD directory layout, and stored relational algebra plans that solve them.

Everything is generated deterministically so tests (and the demo) can rebuild
the dataset anywhere with `build_fixture_dataset(root)`.
"""
from __future__ import annotations

import json
import os
import sqlite3

MOVIES = [
    # movie_id, movie_title, director_name, movie_release_year, movie_popularity, rating_score
    (1, "Night Train", "Steven Spielberg", 2021, 91.5, 8.1),
    (2, "Glass Harbor", "Steven Spielberg", 2019, 77.2, 7.4),
    (3, "Paper Sun", "Steven Spielberg", 2021, 64.8, 6.9),
    (4, "The Long Field", "Agnes Varda", 2020, 58.1, 8.8),
    (5, "Winter Atlas", "Agnes Varda", 2021, 83.4, 7.7),
    (6, "Copper Sky", "Bong Joon-ho", 2020, 95.2, 9.0),
    (7, "Silent Ledger", "Bong Joon-ho", 2018, 41.0, 6.2),
    (8, "Hollow Moon", "Chloe Zhao", 2021, 72.9, 7.1),
    (9, "Red Meridian", "Chloe Zhao", 2017, 33.3, 5.8),
    (10, "The Salt Path", "Kelly Reichardt", 2022, 49.6, 7.9),
    (11, "Ember Lane", "Kelly Reichardt", 2020, 27.4, 6.5),
    (12, "Quiet Engine", "Steven Spielberg", 2016, 88.8, 8.4),
]

RATINGS = [
    # rating_id, movie_id, rating_score, user_id
    (1, 1, 9, 101), (2, 1, 8, 102), (3, 2, 7, 103), (4, 3, 7, 101),
    (5, 4, 9, 104), (6, 5, 8, 105), (7, 6, 10, 106), (8, 6, 9, 101),
    (9, 8, 7, 107), (10, 10, 8, 108),
]

EMPLOYEES = [
    # emp_id, name, dept_id, salary, phone
    (1, "Ada Byron", 1, 82000.0, "555-0101"),
    (2, "Grace Hopper", 1, 91000.0, "555-0102"),
    (3, "Alan Kay", 2, 67000.0, "555-0103"),
    (4, "Barbara Liskov", 2, 78000.0, "555-0104"),
    (5, "Edsger Dijkstra", 3, 45000.0, "555-0105"),
    (6, "Donald Knuth", 3, 52000.0, "555-0106"),
    (7, "Radia Perlman", 4, 38000.0, None),
]

DEPARTMENTS = [
    # dept_id, dept_name, location
    (1, "Research", "Boston"),
    (2, "Engineering", "Austin"),
    (3, "Operations", "Boston"),
    (4, "Support", "Denver"),
]

PROJECTS = [
    # project_id, dept_id, title
    (1, 1, "Compiler Rewrite"),
    (2, 2, "Query Planner"),
    (3, 2, "Storage Layer"),
    (4, 3, "Fleet Dashboard"),
]


def _build_moviedb(path: str) -> None:
    conn = sqlite3.connect(path)
    conn.executescript("""
        CREATE TABLE movies (
            movie_id INTEGER PRIMARY KEY,
            movie_title TEXT NOT NULL,
            director_name TEXT,
            movie_release_year INTEGER,
            movie_popularity REAL,
            rating_score REAL
        );
        CREATE TABLE ratings (
            rating_id INTEGER PRIMARY KEY,
            movie_id INTEGER REFERENCES movies(movie_id),
            rating_score INTEGER,
            user_id INTEGER
        );
    """)
    conn.executemany("INSERT INTO movies VALUES (?,?,?,?,?,?)", MOVIES)
    conn.executemany("INSERT INTO ratings VALUES (?,?,?,?)", RATINGS)
    conn.commit()
    conn.close()


def _build_company(path: str) -> None:
    conn = sqlite3.connect(path)
    conn.executescript("""
        CREATE TABLE department (
            dept_id INTEGER PRIMARY KEY,
            dept_name TEXT NOT NULL,
            location TEXT
        );
        CREATE TABLE employee (
            emp_id INTEGER PRIMARY KEY,
            name TEXT NOT NULL,
            dept_id INTEGER REFERENCES department(dept_id),
            salary REAL,
            phone TEXT
        );
        CREATE TABLE project (
            project_id INTEGER PRIMARY KEY,
            dept_id INTEGER REFERENCES department(dept_id),
            title TEXT
        );
    """)
    conn.executemany("INSERT INTO department VALUES (?,?,?)", DEPARTMENTS)
    conn.executemany("INSERT INTO employee VALUES (?,?,?,?,?)", EMPLOYEES)
    conn.executemany("INSERT INTO project VALUES (?,?,?)", PROJECTS)
    conn.commit()
    conn.close()


RECORDS = [
    {
        "db_id": "moviedb",
        "question": "List the titles of all movies.",
        "SQL": "SELECT movie_title FROM movies",
    },
    {
        "db_id": "moviedb",
        "question": "Which movie titles were released in 2021?",
        "SQL": "SELECT movie_title FROM movies WHERE movie_release_year = 2021",
    },
    {
        "db_id": "moviedb",
        "question": "List the titles of movies directed by Steven Spielberg.",
        "SQL": ("SELECT movie_title FROM movies "
                "WHERE director_name = 'Steven Spielberg'"),
    },
    {
        "db_id": "moviedb",
        "question": "How many movies did each director make?",
        "SQL": ("SELECT director_name, COUNT(*) FROM movies "
                "GROUP BY director_name"),
    },
    {
        "db_id": "moviedb",
        "question": "Which directors made more than 2 movies?",
        "SQL": ("SELECT director_name FROM movies GROUP BY director_name "
                "HAVING COUNT(*) > 2"),
    },
    {
        "db_id": "moviedb",
        "question": "What are the titles of the 3 most popular movies?",
        "SQL": ("SELECT movie_title FROM movies "
                "ORDER BY movie_popularity DESC LIMIT 3"),
    },
    {
        "db_id": "moviedb",
        "question": "List each rated movie title with its rating score.",
        "SQL": ("SELECT m.movie_title, r.rating_score FROM movies m "
                "INNER JOIN ratings r ON m.movie_id = r.movie_id"),
    },
    {
        "db_id": "company",
        "question": "List each employee name with their department name.",
        "SQL": ("SELECT e.name, d.dept_name FROM employee e "
                "INNER JOIN department d ON e.dept_id = d.dept_id"),
    },
    {
        "db_id": "company",
        "question": "List all employee names and department names together.",
        "SQL": "SELECT name FROM employee UNION SELECT dept_name FROM department",
    },
    {
        "db_id": "moviedb",
        "question": "Which movie ids have at least one rating?",
        "SQL": ("SELECT movie_id FROM movies "
                "INTERSECT SELECT movie_id FROM ratings"),
    },
    {
        "db_id": "company",
        "question": "Which employees earn more than 50000?",
        "SQL": "SELECT name FROM employee WHERE salary > 50000",
    },
    {
        "db_id": "company",
        "question": "List the distinct office locations.",
        "SQL": "SELECT DISTINCT location FROM department",
    },
    {
        "db_id": "company",
        "question": "List all employee names.",
        "SQL": "SELECT name FROM employee",
        "issue_sql": "SELECT nam FROM employee",
    },
    {
        "db_id": "company",
        "question": "List the names of all employees.",
        "SQL": "SELECT name FROM employee",
        "issue_sql": "SELECT name, salary FROM employee",
    },
]

GOLD_PLANS = {
    "dev:0": ['["perform_projection", "movies", "movie_title"]'],
    "dev:1": ['["perform_filter", "movies", "movie_release_year = 2021", '
              '"movie_title"]'],
    "dev:2": ['["perform_filter", "movies", '
              '"director_name = \'Steven Spielberg\'"]',
              '["perform_projection", "T_0", "movie_title"]'],
    "dev:3": ['["perform_aggregate", "movies", "director_name", '
              '"director_name, COUNT(*)"]'],
    "dev:4": ['["perform_aggregate", "movies", "director_name", '
              '"director_name", "COUNT(*) > 2"]'],
    "dev:5": ['["perform_order_by", "movies", "movie_popularity DESC", '
              '"movie_title"]',
              '["perform_limit", "T_0", "3"]'],
    "dev:6": ['["perform_join", ["movies as m", "ratings as r"], '
              '["m.movie_id = r.movie_id"], ["INNER JOIN"], '
              '"m.movie_title, r.rating_score"]'],
    "dev:7": ['["perform_join", ["employee as e", "department as d"], '
              '["e.dept_id = d.dept_id"], ["INNER JOIN"], '
              '"e.name, d.dept_name"]'],
    "dev:8": ['["perform_union", "DISTINCT", "employee", "department", '
              '"name", "dept_name"]'],
    "dev:9": ['["perform_intersect", "movies", "ratings", "movie_id", '
              '"movie_id"]'],
    "dev:10": ['["perform_filter", "employee", "salary > 50000", "name"]'],
    "dev:11": ['["perform_projection", "department", "DISTINCT location"]'],
    # remediation: the broken seed fails at reset, then a direct repair
    "dev:12": ['["perform_projection", "employee", "name"]'],
    # remediation: the seed succeeds as T_0, repair projects it down
    "dev:13": ['["perform_projection", "T_0", "name"]'],
}

# Plans that produce a strict subset of their task's target (partial credit).
SUBSET_PLANS = {
    "dev:1": ['["perform_filter", "movies", '
              '"movie_release_year = 2021 AND movie_popularity > 70", '
              '"movie_title"]'],
}


def build_fixture_dataset(root: str, split: str = "dev") -> str:
    """Create the fixture dataset under `root`; returns the manifest path."""
    os.makedirs(root, exist_ok=True)
    db_root = os.path.join(root, f"{split}_databases")
    for db_id, builder in (("moviedb", _build_moviedb),
                           ("company", _build_company)):
        db_dir = os.path.join(db_root, db_id)
        os.makedirs(db_dir, exist_ok=True)
        db_path = os.path.join(db_dir, f"{db_id}.sqlite")
        if os.path.exists(db_path):
            os.remove(db_path)
        builder(db_path)

    manifest_path = os.path.join(root, f"{split}.json")
    with open(manifest_path, "w") as fh:
        json.dump(RECORDS, fh, indent=2)

    def rekey(plans: dict) -> dict:
        return {k.replace("dev:", f"{split}:"): v for k, v in plans.items()}

    with open(os.path.join(root, "plans.json"), "w") as fh:
        json.dump(rekey(GOLD_PLANS), fh, indent=2)
    with open(os.path.join(root, "subset_plans.json"), "w") as fh:
        json.dump(rekey(SUBSET_PLANS), fh, indent=2)
    return manifest_path
