from __future__ import annotations

import os

import pytest

from flashvid.errors import NotFound, ParseError, UnsupportedFormat
from flashvid.ingest import extract_assets, fetch_paper, load_assets
from flashvid.jsonio import read_json
from flashvid.workdir import safe_paper_id

from conftest import FIXTURE_TITLE


class TestSafePaperId:
    def test_strips_extension_and_directories(self):
        assert safe_paper_id("/a/b/My Paper.PDF") == "My_Paper"
        assert safe_paper_id("notes/deep.dive.html") == "deep.dive"

    def test_url_and_identifier_forms(self):
        assert safe_paper_id("https://example.org/papers/xyz.pdf") == "xyz"
        assert safe_paper_id("2401.12345") == "2401.12345"
        assert "/" not in safe_paper_id("http://h/a/b/c/")

    def test_never_empty(self):
        assert safe_paper_id("///") == "paper"


class TestFetchLocal:
    def test_html_bundle_with_sibling_media(self, paper_html, tmp_path):
        bundle = fetch_paper(paper_html, str(tmp_path / "w"), None)
        assert bundle.html_path and os.path.exists(bundle.html_path)
        assert bundle.pdf_path is None
        assert len(bundle.media) == 2
        for local in bundle.media.values():
            assert os.path.exists(local)

    def test_pdf_bundle(self, paper_pdf, tmp_path):
        bundle = fetch_paper(paper_pdf, str(tmp_path / "w"), None)
        assert bundle.pdf_path and os.path.exists(bundle.pdf_path)
        assert bundle.html_path is None

    def test_unknown_extension_rejected(self, tmp_path):
        bad = tmp_path / "paper.docx"
        bad.write_text("not supported")
        with pytest.raises(UnsupportedFormat):
            fetch_paper(str(bad), str(tmp_path / "w"), None)

    def test_missing_source_rejected(self, tmp_path, config):
        with pytest.raises(NotFound):
            fetch_paper("no-such-thing", str(tmp_path / "w"), config)


class TestExtractHtml:
    @pytest.fixture
    def assets(self, paper_html, config):
        bundle = fetch_paper(paper_html, config.workdir, config)
        return extract_assets(bundle, config.workdir, config)

    def test_title_and_sections(self, assets):
        assert assets.title == FIXTURE_TITLE
        headings = [h for h, _ in assets.body_text if h]
        assert "Method" in headings and "Results" in headings

    def test_figures_and_screenshot(self, assets):
        kinds = {a.asset_id: a.kind for a in assets.images}
        assert kinds["first_page"] == "screenshot"
        figures = [a for a in assets.images if a.kind == "figure"]
        assert len(figures) == 2
        for a in assets.images:
            assert os.path.exists(a.path)
            assert a.width_px > 0 and a.height_px > 0

    def test_manifest_roundtrip(self, assets):
        again = load_assets(assets.manifest_path)
        assert again.title == assets.title
        assert again.asset_ids() == assets.asset_ids()
        assert [a.path for a in again.images] == [a.path for a in assets.images]
        assert again.body_text == assets.body_text

    def test_manifest_paths_are_relative(self, assets):
        data = read_json(assets.manifest_path)
        for entry in data["assets"]:
            assert not os.path.isabs(entry["path"])

    def test_unique_asset_ids(self, assets):
        ids = assets.asset_ids()
        assert len(ids) == len(set(ids))


class TestExtractPdf:
    @pytest.fixture
    def assets(self, paper_pdf, config):
        bundle = fetch_paper(paper_pdf, config.workdir, config)
        return extract_assets(bundle, config.workdir, config)

    def test_title_recovered(self, assets):
        assert assets.title == FIXTURE_TITLE

    def test_embedded_figure_with_caption(self, assets):
        figures = [a for a in assets.images if a.kind == "figure"]
        assert len(figures) == 1
        assert figures[0].caption.startswith("Figure 1")

    def test_screenshot_present(self, assets):
        shots = [a for a in assets.images if a.kind == "screenshot"]
        assert len(shots) == 1 and shots[0].asset_id == "first_page"

    def test_body_text_covers_both_pages(self, assets):
        joined = " ".join(t for _, t in assets.body_text)
        assert "gate" in joined
        assert "workloads" in joined


def test_load_assets_requires_one_screenshot(tmp_path, paper_html, config):
    import json

    bundle = fetch_paper(paper_html, config.workdir, config)
    assets = extract_assets(bundle, config.workdir, config)
    data = read_json(assets.manifest_path)
    data["assets"] = [a for a in data["assets"] if a["kind"] != "screenshot"]
    broken = tmp_path / "broken.json"
    broken.write_text(json.dumps(data))
    with pytest.raises(ParseError):
        load_assets(str(broken))
