#include "support.hpp"

#include "callgram/report.hpp"

using namespace callgram;
using testing::error_code_of;
using testing::fixture;

TEST_SUITE("report_ingest") {

TEST_CASE("single NtAllocateVirtualMemory call") {
    const auto r = parse_report(read_file(fixture("unigram.json")), "u1");
    REQUIRE(r.calls.size() == 1);
    CHECK(r.calls[0].api_name == "NtAllocateVirtualMemory");
    CHECK(r.calls[0].category == "system");
    CHECK(r.calls[0].arguments.empty());
    CHECK(r.calls[0].return_value == "0");
    CHECK(r.sample_id == "u1");
}

TEST_CASE("empty object is an EmptyReport") {
    CHECK(error_code_of([] { parse_report("{}", "e"); }) == ErrorCode::EmptyReport);
    CHECK(error_code_of([] { parse_report(read_file(fixture("empty_object.json")), "e"); }) ==
          ErrorCode::EmptyReport);
}

TEST_CASE("errors name the sample") {
    try {
        parse_report("{}", "sample-42");
        FAIL("no throw");
    } catch (const Error &e) {
        CHECK(std::string{e.what()}.find("sample-42") != std::string::npos);
    }
}

TEST_CASE("three processes of two calls flatten in process-major order") {
    const auto r = parse_report(read_file(fixture("three_processes.json")), "p");
    const std::vector<std::string> expected = {"P0First", "P0Second", "P1First", "P1Second", "P2First", "P2Second"};
    REQUIRE(r.calls.size() == expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) CHECK(r.calls[i].api_name == expected[i]);

    // object arguments come out ordered by argument name
    CHECK(r.calls[2].arguments == std::vector<std::string>{"1", "2"});
    CHECK(r.calls[2].return_value == "1");
    CHECK(r.calls[4].arguments == std::vector<std::string>{"7", "true"});
    CHECK(r.calls[5].arguments.empty());  // null argument list
}

TEST_CASE("malformed input") {
    CHECK(error_code_of([] { parse_report(read_file(fixture("truncated.json")), "t"); }) ==
          ErrorCode::MalformedReport);
    CHECK(error_code_of([] { parse_report("[1,2]", "t"); }) == ErrorCode::MalformedReport);
    CHECK(error_code_of([] { parse_report(R"({"behavior": []})", "t"); }) == ErrorCode::MalformedReport);
    CHECK(error_code_of([] { parse_report(R"({"behavior": {"processes": {}}})", "t"); }) ==
          ErrorCode::MalformedReport);
    CHECK(error_code_of([] {
              parse_report(R"({"behavior": {"processes": [{"calls": [{"api": "A", "arguments": 5}]}]}})", "t");
          }) == ErrorCode::MalformedReport);
}

TEST_CASE("calls without an api name are dropped and counted") {
    CHECK(error_code_of([] { parse_report(read_file(fixture("no_usable_calls.json")), "n"); }) ==
          ErrorCode::EmptyReport);
    const auto r = parse_report(
        R"({"behavior": {"processes": [{"calls": [{"api": "A"}, {"category": "x"}, {"api": "  "}, {"api": "B"}]}]}})", "d");
    CHECK(r.calls.size() == 2);
    CHECK(r.dropped_calls == 2);
}

TEST_CASE("api names are normalized") {
    CHECK(normalize_api_name("  Nt Create\t\tFile ") == "Nt_Create_File");
    CHECK(normalize_api_name("DnsQuery_W") == "DnsQuery_W");
    const auto r = parse_report(R"({"behavior": {"processes": [{"calls": [{"api": " Reg Open "}]}]}})", "n");
    CHECK(r.calls[0].api_name == "Reg_Open");
}

TEST_CASE("invalid UTF-8 is replaced by the substitution mark") {
    CHECK(sanitize_utf8("ok") == "ok");
    CHECK(sanitize_utf8("a\xff" "b") == std::string{"a"} + std::string{substitution_mark} + "b");
    CHECK(sanitize_utf8("\xc3\xa9") == "\xc3\xa9");
    CHECK(sanitize_utf8("\xc3") == std::string{substitution_mark});
    const std::string raw = std::string{R"({"behavior": {"processes": [{"calls": [{"api": "A", "arguments": ["x)"} +
                            "\xfe" + R"("]}]}]}})";
    const auto r = parse_report(raw, "u");
    CHECK(r.calls[0].arguments[0] == "x" + std::string{substitution_mark});
}

TEST_CASE("canonical dump round-trips") {
    for (const char *name : {"unigram.json", "call_trace.json", "three_processes.json", "five_calls.json"}) {
        const auto r = parse_report(read_file(fixture(name)), "rt");
        const auto again = parse_report(dump_report(r), "rt");
        CHECK(again.calls == r.calls);
        CHECK(dump_report(again) == dump_report(r));
    }
}

TEST_CASE("call order matches the source for every fixture") {
    const auto r = parse_report(read_file(fixture("five_calls.json")), "f");
    const std::vector<std::string> names = {"NtCreateFile", "NtWriteFile", "NtClose", "socket", "send"};
    REQUIRE(r.calls.size() == names.size());
    for (std::size_t i = 0; i < names.size(); ++i) CHECK(r.calls[i].api_name == names[i]);
    CHECK(r.calls[3].arguments == std::vector<std::string>{"2", "1", "6"});
}

TEST_CASE("worm manifest: 2 train + 1 test") {
    const auto corpus = load_corpus(fixture("worm_manifest.csv"));
    CHECK(corpus.reports.size() == 3);
    REQUIRE(corpus.stats.per_class.size() == 1);
    const auto *worm = corpus.stats.find("worm");
    REQUIRE(worm != nullptr);
    CHECK(worm->train == 2);
    CHECK(worm->test == 1);
    CHECK(corpus.reports[0].sample_id == "worm_a");
    CHECK(corpus.reports[2].sample_id == "worm_c");
    CHECK(corpus.reports[1].label == std::optional<std::string>{"worm"});
}

TEST_CASE("eight-class manifest produces the class table rows") {
    const auto corpus = load_corpus(fixture("table1_manifest.json"));
    const std::vector<std::string> rows = {"Adware", "Worm",   "Virus",  "Backdoor",
                                           "Spyware", "Benign", "Trojan", "Downloader"};
    REQUIRE(corpus.stats.per_class.size() == rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) CHECK(corpus.stats.per_class[i].first == rows[i]);
    const auto table = corpus.stats.table();
    for (const auto &name : rows) CHECK(table.find(name) != std::string::npos);
    CHECK(corpus.stats.totals() == ClassCounts{5, 3});
}

TEST_CASE("manifest validation") {
    CHECK(error_code_of([] { load_manifest(fixture("duplicate_manifest.csv")); }) == ErrorCode::ManifestError);

    const auto dir = testing::scratch("manifest_validation");
    std::filesystem::copy_file(fixture("unigram.json"), dir / "a.json");
    auto manifest_with = [&](const std::string &body) {
        write_file_atomic(dir / "m.csv", "path,sample_id,label,split\n" + body);
        return dir / "m.csv";
    };
    CHECK(error_code_of([&] { load_manifest(manifest_with("missing.json,a,worm,train\n")); }) ==
          ErrorCode::ManifestError);
    CHECK(error_code_of([&] { load_manifest(manifest_with("a.json,a,worm,validation\n")); }) ==
          ErrorCode::ManifestError);
    CHECK(error_code_of([&] { load_manifest(manifest_with("a.json,bad id,worm,train\n")); }) ==
          ErrorCode::ManifestError);
    write_file_atomic(dir / "bad_header.csv", "file,id,label,split\na.json,a,worm,train\n");
    CHECK(error_code_of([&] { load_manifest(dir / "bad_header.csv"); }) == ErrorCode::ManifestError);

    const auto ok = load_manifest(manifest_with("a.json,a,worm,train\n\"a.json\",b,,test\n"));
    REQUIRE(ok.entries.size() == 2);
    CHECK(ok.entries[1].label.empty());
    CHECK(ok.entries[0].path == dir / "a.json");
}

TEST_CASE("manifest write/load round trip") {
    const auto dir = testing::scratch("manifest_roundtrip");
    std::filesystem::create_directories(dir / "reports");
    std::filesystem::copy_file(fixture("call_trace.json"), dir / "reports" / "x.json");
    CorpusManifest m;
    m.entries.push_back({dir / "reports" / "x.json", "x", "Worm", Split::Train});
    m.entries.push_back({dir / "reports" / "x.json", "y", "Virus", Split::Test});
    write_manifest(m, dir / "manifest.csv");
    CHECK(read_file(dir / "manifest.csv") ==
          "path,sample_id,label,split\nreports/x.json,x,Worm,train\nreports/x.json,y,Virus,test\n");
    const auto back = load_manifest(dir / "manifest.csv");
    REQUIRE(back.entries.size() == 2);
    CHECK(back.entries[1].split == Split::Test);
    CHECK(back.with_split(Split::Train).size() == 1);
}

TEST_CASE("streaming visit preserves manifest order") {
    const auto m = load_manifest(fixture("worm_manifest.csv"));
    std::vector<const ManifestEntry *> all;
    for (const auto &e : m.entries) all.push_back(&e);
    std::vector<std::string> seen;
    for_each_report(all, [&](const ManifestEntry &e, BehaviorReport &&r) {
        CHECK(e.sample_id == r.sample_id);
        seen.push_back(r.sample_id);
    });
    CHECK(seen == std::vector<std::string>{"worm_a", "worm_b", "worm_c"});
}

}
