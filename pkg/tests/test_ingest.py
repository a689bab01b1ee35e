"""Raw log parsing, manifests and corpus loading."""

from __future__ import annotations

import pytest
from hypothesis import given, strategies as st

from tracesvm import (
    CorpusManifest,
    EmptyTraceError,
    ManifestError,
    SyscallTrace,
    extract_call_name,
    load_corpus,
    parse_trace,
    read_manifest,
    read_trace_file,
    write_manifest,
    write_processed,
)

RAW_EXCERPT = """\
NtQueryPerformanceCounter( Counter=0xbcf6c8 [1.45779e+009], Freq=null ) => 0
NtProtectVirtualMemory( ProcessHandle=-1, BaseAddress=0xbcf6f4 [0x77eae000], Size=0xbcf6f8 [4096], NewProtect=PAGE_EXECUTE_READWRITE, OldProtect=0xbcf6dc [PAGE_EXECUTE_WRITECOPY?]
NtProtectVirtualMemory( ProcessHandle=-1, BaseAddress=0xbcf6f4 [0x7702e000]?
NtQuerySystemInformation( SystemInformationClass=0 [SystemBasicInformation], SystemInformation=0xbcf5f4, SystemInformationLength=44, ReturnLength=null ) => 0
NtQueryVirtualMemory( ProcessHandle=-1, BaseAddress=0x76f20000,
"""

UNLOAD_MIX = """\
Unload of DLL at 04ED0000
Unload of DLL at 04FC0000
NtQueryPerformanceCounter( Counter=0x4e9f9c8 [3.01683e+009], Freq=null ) => 0
NtProtectVirtualMemory( ProcessHandle=-1, BaseAddress=0x4e9f9f4 [0x77eae000], Size=0x4e9f9f8
"""


class TestExtractCallName:
    def test_basic_call_line(self):
        line = "NtCreateFile( FileHandle=0x12f0c4, DesiredAccess=GENERIC_READ ) => 0"
        assert extract_call_name(line) == "ntcreatefile"

    def test_informational_line(self):
        assert extract_call_name("Unload of DLL at 04ED0000") is None

    def test_blank_and_garbage(self):
        assert extract_call_name("") is None
        assert extract_call_name("   ") is None
        assert extract_call_name("0x77eae000, Size=0xbcf6f8") is None

    def test_truncated_parameters_keep_the_name(self):
        assert (
            extract_call_name("NtProtectVirtualMemory( ProcessHandle=-1, BaseAddress=0xbcf6f4 [0x7702e000]?")
            == "ntprotectvirtualmemory"
        )

    def test_leading_whitespace_ok(self):
        assert extract_call_name("  \tNtClose( Handle=0x1 ) => 0") == "ntclose"

    def test_space_before_paren_rejected(self):
        assert extract_call_name("NtClose ( Handle=0x1 )") is None

    def test_prefix_casing(self):
        # lowercase processed form re-parses; other casings are not calls
        assert extract_call_name("ntclose(") == "ntclose"
        assert extract_call_name("NTCLOSE(") is None
        assert extract_call_name("nTClose(") is None

    def test_bare_prefix_edge(self):
        assert extract_call_name("Nt(") == "nt"

    def test_name_alone_on_line_is_a_call(self):
        # processed files carry one bare name per line
        assert extract_call_name("ntqueryperformancecounter") == "ntqueryperformancecounter"
        assert extract_call_name("ntclose \t") == "ntclose"
        assert extract_call_name("NTCLOSE") is None
        assert extract_call_name("ntclose => 0") is None

    @given(st.text(max_size=80))
    def test_fuzz_output_invariants(self, line):
        name = extract_call_name(line)
        if name is not None:
            assert name.startswith("nt")
            assert name == name.lower()
            assert " " not in name


class TestParseTrace:
    def test_five_line_excerpt(self):
        trace = parse_trace(RAW_EXCERPT, "excerpt")
        assert len(trace) == 5
        assert trace.calls[0] == "ntqueryperformancecounter"
        assert trace.calls[-1] == "ntqueryvirtualmemory"

    def test_unload_lines_dropped(self):
        trace = parse_trace(UNLOAD_MIX, "mix")
        assert trace.calls == ("ntqueryperformancecounter", "ntprotectvirtualmemory")

    def test_crlf_equivalent(self):
        a = parse_trace(UNLOAD_MIX, "lf")
        b = parse_trace(UNLOAD_MIX.replace("\n", "\r\n"), "crlf")
        assert a.calls == b.calls

    def test_no_calls_raises(self):
        with pytest.raises(EmptyTraceError):
            parse_trace("Unload of DLL at 04ED0000\n\n", "empty")

    def test_round_trip_idempotence(self):
        trace = parse_trace(RAW_EXCERPT, "excerpt")
        rendered = "\n".join(f"{name}(" for name in trace.calls)
        again = parse_trace(rendered, "rendered")
        assert again.calls == trace.calls

    def test_label_attachment(self):
        trace = parse_trace(RAW_EXCERPT, "excerpt")
        assert trace.label is None
        labeled = trace.with_label("malicious")
        assert labeled.label == "malicious"
        with pytest.raises(ManifestError):
            trace.with_label("suspicious")


class TestFiles:
    def test_read_trace_file_skips_undecodable_lines(self, tmp_path):
        p = tmp_path / "partial.log"
        p.write_bytes(
            b"NtClose( Handle=0x1 ) => 0\n"
            b"\xff\xfe garbage NtOpenKeyEx(\n"
            b"NtCreateFile( FileHandle=0x2 ) => 0\n"
        )
        trace = read_trace_file(p)
        assert trace.calls == ("ntclose", "ntcreatefile")

    def test_write_processed_round_trip(self, tmp_path):
        trace = parse_trace(RAW_EXCERPT, "excerpt")
        out = tmp_path / "processed.txt"
        write_processed(trace, out)
        assert out.read_bytes().endswith(b"\n")
        assert b"\r" not in out.read_bytes()
        again = read_trace_file(out)
        assert again.calls == trace.calls

    def test_missing_file_names_path(self, tmp_path):
        missing = tmp_path / "nope.log"
        with pytest.raises(OSError) as err:
            read_trace_file(missing)
        assert "nope.log" in str(err.value)

    def test_empty_file_names_path(self, tmp_path):
        p = tmp_path / "hollow.log"
        p.write_text("just noise\n")
        with pytest.raises(EmptyTraceError) as err:
            read_trace_file(p)
        assert "hollow.log" in str(err.value)


class TestManifest:
    def _write_corpus(self, tmp_path):
        (tmp_path / "a.log").write_text("NtClose( Handle=1 ) => 0\nNtOpenKeyEx( K=2 ) => 0\n")
        (tmp_path / "b.log").write_text("NtCreateFile( F=3 ) => 0\n")
        write_manifest([("a.log", "malicious"), ("b.log", "benign")], tmp_path / "manifest.csv")
        return tmp_path / "manifest.csv"

    def test_round_trip(self, tmp_path):
        mpath = self._write_corpus(tmp_path)
        manifest = read_manifest(mpath)
        assert isinstance(manifest, CorpusManifest)
        assert [label for _, label in manifest.entries] == ["malicious", "benign"]
        assert [p.name for p, _ in manifest.entries] == ["a.log", "b.log"]

    def test_load_corpus_order_and_labels(self, tmp_path):
        manifest = read_manifest(self._write_corpus(tmp_path))
        corpus = load_corpus(manifest)
        assert [t.label for t in corpus] == ["malicious", "benign"]
        assert corpus[0].calls == ("ntclose", "ntopenkeyex")
        assert corpus[1].calls == ("ntcreatefile",)
        assert all(isinstance(t, SyscallTrace) for t in corpus)

    def test_bad_label_rejected(self, tmp_path):
        bad = tmp_path / "manifest.csv"
        bad.write_text("path,label\nx.log,weird\n")
        with pytest.raises(ManifestError):
            read_manifest(bad)

    def test_duplicate_path_rejected(self, tmp_path):
        bad = tmp_path / "manifest.csv"
        bad.write_text("path,label\nx.log,benign\nx.log,malicious\n")
        with pytest.raises(ManifestError):
            read_manifest(bad)

    def test_wrong_header_rejected(self, tmp_path):
        bad = tmp_path / "manifest.csv"
        bad.write_text("file,class\nx.log,benign\n")
        with pytest.raises(ManifestError):
            read_manifest(bad)

    def test_missing_trace_file_surfaces_path(self, tmp_path):
        m = tmp_path / "manifest.csv"
        write_manifest([("ghost.log", "benign")], m)
        with pytest.raises(OSError) as err:
            load_corpus(read_manifest(m))
        assert "ghost.log" in str(err.value)
