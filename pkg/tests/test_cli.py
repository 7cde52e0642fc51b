import io
import json

import pytest

from temlint.cli import main, parse_config, run


def invoke(*argv):
    out, err = io.StringIO(), io.StringIO()
    try:
        cfg = parse_config(argv)
    except SystemExit as exc:
        return exc.code, "", ""
    return run(cfg, out, err), out.getvalue(), err.getvalue()


@pytest.fixture
def files(tmp_path):
    def make(**contents):
        paths = {}
        for name, text in contents.items():
            p = tmp_path / name.replace("_", ".")
            p.write_text(text, "utf-8")
            paths[name] = str(p)
        return paths

    return make


def test_clean_file(files):
    p = files(ok_html="<p>{{ user.name }}</p>\n")
    assert invoke("check", p["ok_html"]) == (0, "", "")


def test_nested_delimiter_machine_record(files):
    p = files(row1_html="{% if {{user}} %}hi{% endif %}")
    status, out, _ = invoke("check", "--format", "machine", p["row1_html"])
    (rec,) = [json.loads(line) for line in out.splitlines()]
    assert status == 1 and rec["code"] == "TL001" and rec["fix_available"] and rec["fix"]
    assert rec["symptom_tag"] == "Bad Delimiter" and rec["root_cause_tag"] == "Delimiter Misuse"
    assert rec["span"]["line"] == 1 and rec["span"]["col"] == 7
    assert set(rec) >= {"code", "span", "message", "symptom_tag", "root_cause_tag", "fix_available"}


def test_human_format(files):
    p = files(a_html="x\n{{ user->name }}")
    status, out, _ = invoke("check", p["a_html"])
    assert status == 1
    assert out.startswith(f"{p['a_html']}:2:4: TL004 ")
    assert out.rstrip().endswith("[Property Access Error/Invalid Access Semantic]")


def test_fix_relocates_extends(files):
    p = files(row2_html='{{item}}{% extends "b" %}')
    status, out, err = invoke("fix", p["row2_html"])
    assert (status, out) == (0, '{% extends "b" %}{{item}}')
    assert "applied 1 fix" in err


def test_fix_single_pass_leaves_remaining(files):
    p = files(u_html="{% if user")
    status, out, _ = invoke("fix", "--single-pass", p["u_html"])
    assert (status, out) == (1, "{% if user %}")
    status, out, _ = invoke("fix", p["u_html"])
    assert (status, out) == (0, "{% if user %}{% endif %}")


def test_fix_write_then_check(files, syntax_cases, tmp_path):
    paths = []
    for case in syntax_cases:
        p = tmp_path / f"{case.id}.html"
        p.write_text(case.input, "utf-8")
        paths.append(str(p))
    status, out, _ = invoke("fix", "--write", *paths)
    assert status == 0 and out == ""
    assert invoke("check", *paths)[0] == 0
    assert invoke("check", str(tmp_path / "*.html"))[0] == 0


def test_fix_machine_output(files):
    p = files(m_html="{{ a->b }}")
    status, out, _ = invoke("fix", "--format", "machine", p["m_html"])
    rec = json.loads(out)
    assert status == 0 and rec["fixed"] == "{{ a.b }}" and rec["passes"] == 1 and rec["remaining"] == []


def test_unreadable_file_is_io_failure(files, tmp_path):
    p = files(ok_html="{{ x }}")
    missing = str(tmp_path / "missing.html")
    status, out, err = invoke("check", missing, p["ok_html"])
    assert status == 2 and missing in err
    bad = tmp_path / "bin.html"
    bad.write_bytes(b"\xff\xfe{{")
    assert invoke("check", str(bad))[0] == 2


def test_batch_status_is_worst(files):
    p = files(a_html="{{ x }}", b_html="{{ a->b }}")
    assert invoke("check", p["a_html"], p["b_html"])[0] == 1


def test_schema_command(files):
    p = files(t_html="{% for t in todos %}{{ t.title }}{% endfor %}")
    status, out, _ = invoke("schema", p["t_html"])
    doc = json.loads(out)
    assert status == 0 and doc["roots"]["todos"]["kind"] == "iterable"
    status, out, _ = invoke("schema", "--format", "machine", p["t_html"])
    assert json.loads(out)["schema"] == doc


def test_verify_command(files):
    p = files(
        t_html="{{ username }}{% for t in todos %}{{ t.title }}{% endfor %}",
        ok_json=json.dumps({"username": "u", "todos": [{"title": "x"}]}),
        bad_yaml="todos: 5\nextra: 1\n",
        broken_json="{",
    )
    assert invoke("verify", p["t_html"], "--context", p["ok_json"]) == (0, "", "")
    status, out, _ = invoke("verify", "--format", "machine", p["t_html"], "--context", p["bad_yaml"])
    kinds = [(r["path"], r["kind"]) for r in map(json.loads, out.splitlines())]
    assert status == 1
    assert kinds == [("extra", "unused-context-key"), ("todos", "kind-mismatch"), ("username", "missing-placeholder")]
    assert invoke("verify", p["t_html"], "--context", p["broken_json"])[0] == 2


def test_verify_unused_only_is_clean(files):
    p = files(t_html="{{ a }}", c_json='{"a": 1, "b": 2}')
    status, out, _ = invoke("verify", p["t_html"], "--context", p["c_json"])
    assert status == 0 and "unused-context-key" in out


def test_verify_strictness(files):
    p = files(t_html="{% if a %}{{ b }}{% endif %}", c_json='{"a": 0}')
    assert invoke("verify", p["t_html"], "--context", p["c_json"])[0] == 1
    assert invoke("verify", "--strictness", "must-use", p["t_html"], "--context", p["c_json"])[0] == 0


def test_verify_against_schema_document(files):
    p = files(t_html="{{ u.name }}")
    _, out, _ = invoke("schema", p["t_html"])
    q = files(s_json=out, c_json='{"u": {}}')
    status, out, _ = invoke("verify", q["s_json"], "--context", q["c_json"])
    assert status == 1 and "u.name: missing-property" in out


def test_usage_errors():
    assert invoke("bogus")[0] == 2
    assert invoke("check")[0] == 2
    assert invoke("verify", "a.html")[0] == 2


def test_bad_catalog(files):
    p = files(t_html="{{ x }}", cat_json="[]")
    assert invoke("schema", "--catalog", p["cat_json"], p["t_html"])[0] == 2
    assert invoke("schema", "--catalog", p["t_html"] + ".nope", p["t_html"])[0] == 2


def test_main_entry(files, capsys):
    p = files(ok_html="{{ x }}")
    assert main(["check", p["ok_html"]]) == 0
    with pytest.raises(SystemExit) as exc:
        main(["check", "--format", "xml", p["ok_html"]])
    assert exc.value.code == 2


def test_select_limits_rules(files):
    p = files(r_html="{% if {{user}} %}")
    status, out, _ = invoke("check", "--format", "machine", p["r_html"])
    assert sorted(json.loads(line)["code"] for line in out.splitlines()) == ["TL001", "TL003"]
    status, out, _ = invoke("check", "--select", "tl001", "--format", "machine", p["r_html"])
    assert [json.loads(line)["code"] for line in out.splitlines()] == ["TL001"]
    assert invoke("fix", "--single-pass", "--select", "TL001", p["r_html"])[:2] == (0, "{% if user %}")
    assert invoke("fix", p["r_html"])[:2] == (0, "{% if user %}{% endif %}")
    assert invoke("check", "--select", "TL009", p["r_html"])[0] == 2
