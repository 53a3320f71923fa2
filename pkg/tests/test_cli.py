import json

import pytest

from datamarket_rec.cli import main
from datamarket_rec.config import RunConfig
from datamarket_rec.ingestion import load_canonical
from datamarket_rec.recommenders import Algorithm, Similarity

THREE_ROWS = (
    "source_kind,source_id,target_kind,target_id,weight,timestamp\n"
    "user,u1,dataset,d1,,\nuser,u1,service,s1,,\nuser,u2,service,s1,,\n"
)


@pytest.fixture
def canonical(tmp_path):
    path = tmp_path / "data.csv"
    path.write_text(THREE_ROWS, encoding="utf-8")
    return path


def test_ingest_prints_statistics(canonical, capsys):
    assert main(["ingest", "--canonical", str(canonical)]) == 0
    out = capsys.readouterr().out
    assert "Number of users: 2" in out and "Number of user/service interactions: 2" in out


def test_ingest_with_projection(canonical, capsys):
    assert main(["ingest", "--canonical", str(canonical), "--with-projection"]) == 0
    assert "Number of dataset/service interactions: 1" in capsys.readouterr().out


def test_ingest_bad_path(tmp_path, capsys):
    missing = tmp_path / "nope.csv"
    assert main(["ingest", "--canonical", str(missing)]) == 2
    assert str(missing) in capsys.readouterr().err


def test_ingest_parse_error_exits_2(tmp_path, capsys):
    path = tmp_path / "bad.csv"
    path.write_text(THREE_ROWS + "dataset,d1,user,u1,,\n", encoding="utf-8")
    assert main(["ingest", "--canonical", str(path)]) == 2
    assert ":5" in capsys.readouterr().err


def test_ingest_meta_kaggle(tmp_path, capsys):
    forum = tmp_path / "f.csv"
    forum.write_text("PostUserId,DatasetId\nu1,d1\nu2,d1\n", encoding="utf-8")
    votes = tmp_path / "v.csv"
    votes.write_text("UserId,KernelId\nu1,k1\n", encoding="utf-8")
    mapping = tmp_path / "m.toml"
    mapping.write_text(
        '[forum]\nuser_column="PostUserId"\ndataset_column="DatasetId"\n'
        '[votes]\nuser_column="UserId"\nservice_column="KernelId"\n',
        encoding="utf-8",
    )
    out = tmp_path / "canon.csv"
    code = main(
        ["ingest", "--meta-kaggle", "--forum", str(forum), "--votes", str(votes),
         "--mapping", str(mapping), "--out", str(out), "--check-snapshot"]
    )
    assert code == 0
    assert len(load_canonical(out)) == 3


def test_project_writes_links(canonical, tmp_path):
    out = tmp_path / "proj.csv"
    assert main(["project", str(canonical), "--out", str(out)]) == 0
    (link,) = load_canonical(out)
    assert (link.source.id, link.target.id, link.weight) == ("d1", "s1", 1)


def test_recommend(canonical, capsys):
    assert main(["recommend", str(canonical), "--uc", "uc2", "--target", "u1", "--algo", "mp"]) == 0
    assert capsys.readouterr().out == "1\ts1\t2.000000\n"


def test_evaluate_golden(data_dir, tmp_path, capsys):
    out_json = tmp_path / "r.json"
    code = main(["evaluate", str(data_dir / "golden_store.csv"), "--uc", "all", "--algo", "mp,cf",
                 "--seed", "7", "--output", str(out_json)])
    assert code == 0
    assert capsys.readouterr().out == (data_dir / "golden_report.tsv").read_text(encoding="utf-8")
    assert out_json.read_text(encoding="utf-8") == (data_dir / "golden_report.json").read_text(encoding="utf-8")


def test_evaluate_hub_fixture_p_at_1(data_dir, capsys):
    assert main(["evaluate", str(data_dir / "hub_store.csv"), "--uc", "uc3", "--algo", "mp"]) == 0
    header, row = capsys.readouterr().out.splitlines()
    cols = dict(zip(header.split("\t"), row.split("\t")))
    assert cols["P@1"] == "1.000000"


def test_evaluate_unknown_use_case(canonical, capsys):
    assert main(["evaluate", str(canonical), "--uc", "uc9"]) == 2
    assert "uc9" in capsys.readouterr().err


def test_evaluate_zero_cases_exit_1(canonical):
    assert main(["evaluate", str(canonical), "--uc", "uc1", "--algo", "mp"]) == 1


def test_generate(tmp_path, capsys):
    out = tmp_path / "g.csv"
    assert main(["--seed", "3", "generate", "--users", "20", "--datasets", "3", "--services", "5", "--out", str(out)]) == 0
    first = out.read_text()
    assert main(["generate", "--seed", "3", "--users", "20", "--datasets", "3", "--services", "5", "--out", str(out)]) == 0
    assert out.read_text() == first
    assert "Number of users: 20" in capsys.readouterr().out


def test_usage_error_exit_code():
    with pytest.raises(SystemExit) as info:
        main(["evaluate"])
    assert info.value.code == 2


def test_profile_file(tmp_path, data_dir, capsys):
    cfg = tmp_path / "run.toml"
    cfg.write_text(
        "[profiles.cf]\nk = 3\nsimilarity = \"jaccard\"\n[split]\nholdout = 5\nmin_interactions = 6\nseed = 4\n",
        encoding="utf-8",
    )
    loaded = RunConfig.load(cfg)
    assert loaded.profiles[Algorithm.CF].k == 3
    assert loaded.profiles[Algorithm.CF].similarity is Similarity.JACCARD
    assert loaded.profiles[Algorithm.MP].k == 10
    assert loaded.split.holdout == 5
    code = main(["evaluate", str(data_dir / "golden_store.csv"), "--uc", "uc2", "--algo", "cf",
                 "--profile", str(cfg), "--strategy", "seeded-random"])
    assert code == 0


def test_bad_config_rejected(tmp_path):
    cfg = tmp_path / "run.toml"
    cfg.write_text("[profiles.cf]\nk = 0\n", encoding="utf-8")
    with pytest.raises(ValueError):
        RunConfig.load(cfg)
    cfg.write_text("[split]\nfoo = 1\n", encoding="utf-8")
    with pytest.raises(ValueError, match="foo"):
        RunConfig.load(cfg)
