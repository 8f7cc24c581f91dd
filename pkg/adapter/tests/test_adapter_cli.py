import pytest

from gdc_adapter import cli
from gdc_adapter.config import AdapterConfig
from gdc_adapter.errors import ConfigError



def test_generate_empty_manifest_ok(tmp_path, capsys):
    manifest = tmp_path / "m.tsv"
    manifest.write_text("")
    rc = cli.main(["generate", "--manifest", str(manifest),
                   "--out-dir", str(tmp_path / "imgs")])
    assert rc == 0
    assert "generated 0 images" in capsys.readouterr().out


def test_generate_missing_manifest(tmp_path, capsys):
    rc = cli.main(["generate", "--manifest", str(tmp_path / "nope.tsv"),
                   "--out-dir", str(tmp_path / "imgs")])
    assert rc == 2


def test_encode_missing_directory(tmp_path):
    rc = cli.main(["encode", "--images", str(tmp_path / "nope"),
                   "--out", str(tmp_path / "r.gdce")])
    assert rc == 2


def test_generate_unavailable_backend_exit_code(tmp_path, capsys, write_manifest_lines):
    manifest = tmp_path / "m.tsv"
    write_manifest_lines(manifest, [("cat", "a photo of a cat", 1, 0)])
    rc = cli.main(["generate", "--manifest", str(manifest),
                   "--out-dir", str(tmp_path / "imgs"),
                   "--diffusion-model", "this/model-does-not-exist"])
    assert rc == 3


def test_config_validation():
    with pytest.raises(ConfigError):
        AdapterConfig(encoder="")
    with pytest.raises(ConfigError):
        AdapterConfig(batch_size=0)
    with pytest.raises(ConfigError):
        AdapterConfig(generation_size=-1)
