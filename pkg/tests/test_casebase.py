import pytest

from adaptmine import (
    KBLoadError,
    canonical_kb_text,
    dump_kb,
    load_kb,
    parse_kb_text,
)


class TestLoading:
    def test_worked_fixture(self, worked_kb):
        assert len(worked_kb.cases) == 1
        assert len([a for a in worked_kb.ontology.axioms]) == 9
        assert worked_kb.cases[0].solution == ("Partial-Mastectomy",)
        assert worked_kb.digest

    def test_empty_cases_section_is_valid(self):
        kb = parse_kb_text("[ontology]\na isa b\n[cases]\n")
        assert kb.cases == ()

    def test_comments_and_blank_lines_ignored(self):
        kb = parse_kb_text(
            "# header\n[ontology]\n\n# inclusion\na isa b\n[cases]\n# none yet\n"
        )
        assert len(kb.ontology.axioms) == 1

    def test_missing_file(self, tmp_path):
        with pytest.raises(KBLoadError):
            load_kb(tmp_path / "absent.txt")

    def test_file_round_trip(self, tmp_path, worked_kb):
        path = tmp_path / "kb.txt"
        dump_kb(worked_kb, path)
        again = load_kb(path)
        assert again.digest == worked_kb.digest
        assert canonical_kb_text(again) == canonical_kb_text(worked_kb)


class TestValidationErrors:
    def test_defined_name_in_inclusion(self):
        with pytest.raises(KBLoadError):
            parse_kb_text("[ontology]\nDefined := a and b\nDefined isa Atomic\n[cases]\n")

    def test_duplicate_case_ids(self):
        with pytest.raises(KBLoadError, match="duplicate case id"):
            parse_kb_text("[ontology]\n[cases]\nc1 | a | D\nc1 | b | D\n")

    def test_empty_solution_rejected(self):
        with pytest.raises(KBLoadError, match="empty solution"):
            parse_kb_text("[ontology]\n[cases]\nc1 | a |\n")

    def test_defined_decision_rejected(self):
        with pytest.raises(KBLoadError, match="decisions must be atomic"):
            parse_kb_text("[ontology]\nD := a and b\n[cases]\nc1 | a | D\n")

    def test_syntax_error_carries_line(self):
        with pytest.raises(KBLoadError, match="line 3"):
            parse_kb_text("[ontology]\n[cases]\nc1 | a and and b | D\n")

    def test_unsupported_comparator_is_load_error(self):
        with pytest.raises(KBLoadError):
            parse_kb_text("[ontology]\n[cases]\nc1 | (age <= 5) | D\n")

    def test_contradictory_constraints_rejected(self):
        with pytest.raises(KBLoadError, match="contradictory"):
            parse_kb_text("[ontology]\n[cases]\nc1 | (age >= 70) and (age < 30) | D\n")

    def test_role_grole_clash(self):
        with pytest.raises(KBLoadError, match="role and concrete role"):
            parse_kb_text("[ontology]\n[cases]\nc1 | some f.a and (f >= 1) | D\n")

    def test_cyclic_definitions_rejected(self):
        with pytest.raises(KBLoadError):
            parse_kb_text("[ontology]\nP := Q and x\nQ := P and y\n[cases]\n")

    def test_content_before_section(self):
        with pytest.raises(KBLoadError, match="before any section"):
            parse_kb_text("a isa b\n[ontology]\n[cases]\n")

    def test_unknown_section(self):
        with pytest.raises(KBLoadError, match="unknown section"):
            parse_kb_text("[rules]\n")


class TestDigest:
    def test_digest_ignores_case_order(self):
        kb1 = parse_kb_text("[ontology]\n[cases]\nc1 | a | D\nc2 | b | E\n")
        kb2 = parse_kb_text("[ontology]\n[cases]\nc2 | b | E\nc1 | a | D\n")
        assert kb1.digest == kb2.digest

    def test_digest_sees_content_change(self):
        kb1 = parse_kb_text("[ontology]\n[cases]\nc1 | a | D\n")
        kb2 = parse_kb_text("[ontology]\n[cases]\nc1 | a | E\n")
        assert kb1.digest != kb2.digest

    def test_digest_normalizes_rendering(self):
        kb1 = parse_kb_text("[ontology]\n[cases]\nc1 | b and a | D\n")
        kb2 = parse_kb_text("[ontology]\n[cases]\nc1 | a and b | D\n")
        assert kb1.digest == kb2.digest
