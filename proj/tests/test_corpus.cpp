#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "mutsum/corpus.hpp"
#include "mutsum/digest.hpp"
#include "mutsum/error.hpp"
#include "mutsum/fsutil.hpp"
#include "support/paths.hpp"

using namespace mutsum;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        static int counter = 0;
        path = fs::temp_directory_path() /
               ("mutsum-corpus-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

void write(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

}  // namespace

TEST_CASE("count_loc skips blank and comment-only lines") {
    CHECK(count_loc("") == 0);
    CHECK(count_loc("\n\n") == 0);
    CHECK(count_loc("x = 1\n") == 1);
    CHECK(count_loc("# c\nx = 1  # trailing\n   \n\t# indented comment\ny = 2") == 2);
    CHECK(effective_lines("# c\nx = 1\n\ny = 2\n") == std::vector<std::size_t>{2, 4});
}

TEST_CASE("complexity classification") {
    CHECK(classify_complexity("def f():\n    return 1\n") == ComplexityCategory::SF);
    CHECK(classify_complexity("class A:\n    pass\n\ndef f():\n    pass\n") == ComplexityCategory::SC);
    CHECK(classify_complexity("class A:\n    pass\n\n@dataclass\nclass B:\n    x: int\n") ==
          ComplexityCategory::MC);
    CHECK(classify_complexity("import threading\n\nclass A:\n    pass\n\nclass B:\n    pass\n") ==
          ComplexityCategory::MT);
    CHECK(classify_complexity("from concurrent.futures import ThreadPoolExecutor\n"
                              "class A:\n    pass\nclass B:\n    pass\n") == ComplexityCategory::MT);
    CHECK(classify_complexity("class A:\n    def run(self):\n        t = Thread(target=self.go)\n"
                              "class B:\n    pass\n") == ComplexityCategory::MT);
    // threads without two classes stay in their class-count category
    CHECK(classify_complexity("import threading\n\ndef f():\n    pass\n") == ComplexityCategory::SF);
    // nested classes do not count
    CHECK(classify_complexity("class A:\n    class Inner:\n        pass\n") == ComplexityCategory::SC);
    CHECK_THROWS_AS(classify_complexity("def f(:\n"), ParseError);
    CHECK_THROWS_AS(classify_complexity("if x:\n    # only a comment\n"), ParseError);
}

TEST_CASE("demo corpus categories") {
    const IngestResult r = ingest_directory(testing::demo_corpus_dir(), Origin::Synthetic);
    REQUIRE(r.rejected.empty());
    REQUIRE(r.programs.size() == 3);
    CHECK(r.programs[0].id == "kruskal");
    CHECK(r.programs[0].complexity == ComplexityCategory::MC);
    CHECK(r.programs[1].id == "merge_sort");
    CHECK(r.programs[1].complexity == ComplexityCategory::SF);
    CHECK(r.programs[2].id == "min_heap");
    CHECK(r.programs[2].complexity == ComplexityCategory::SC);
}

TEST_CASE("make_program validation") {
    CHECK_THROWS_AS(make_program("", "x = 1\n", Origin::Custom), IngestError);
    CHECK_THROWS_AS(make_program("a/b", "x = 1\n", Origin::Custom), IngestError);
    CHECK_THROWS_AS(make_program("p", "# nothing\n", Origin::Custom), IngestError);
    CHECK_THROWS_AS(make_program("p", "def (:\n", Origin::Custom), ParseError);
    const Program p = make_program("p", "x = 1\n\ny = 2\n", Origin::Custom, std::string("T"));
    CHECK(p.loc == 2);
    CHECK(p.title == "T");
    CHECK(sanitize_id("python/071 x") == "python_071_x");
}

TEST_CASE("program JSON round trip") {
    const Program p = make_program("p", "class A:\n    pass\n", Origin::Corpus, std::string("title"));
    const nlohmann::json j = p;
    CHECK(j.get<Program>() == p);
    CHECK_FALSE(program_metadata(p).contains("source_text"));
}

TEST_CASE("directory ingestion records rejections per file") {
    TempDir dir;
    write(dir.path / "good.py", "def f():\n    return 1\n");
    write(dir.path / "bad.py", "def f(:\n");
    write(dir.path / "empty.py", "# just a comment\n");
    write(dir.path / "notes.txt", "ignored\n");
    const IngestResult r = ingest_directory(dir.path, Origin::Custom);
    REQUIRE(r.programs.size() == 1);
    CHECK(r.programs[0].id == "good");
    CHECK(r.rejected.size() == 2);
    const auto manifest = r.manifest();
    CHECK(manifest["accepted"].size() == 1);
    CHECK(manifest["rejected"].size() == 2);
    CHECK_THROWS_AS(ingest_directory(dir.path / "missing", Origin::Custom), IngestError);
}

TEST_CASE("jsonl ingestion with a field map") {
    TempDir dir;
    const fs::path file = dir.path / "lbpp.jsonl";
    write(file,
          "{\"task_id\": \"python/1\", \"code\": \"def f():\\n    return 1\\n\", \"name\": \"one\"}\n"
          "\n"
          "{\"task_id\": \"python/2\", \"code\": \"def (:\\n\"}\n"
          "not json\n"
          "[1, 2]\n"
          "{\"task_id\": \"python/1\", \"code\": \"x = 1\\n\"}\n"
          "{\"task_id\": 7, \"code\": \"x = 2\\n\"}\n"
          "{\"code\": \"x = 3\\n\"}\n");
    const FieldMap fields = parse_field_map("id=task_id,source=code,title=name");
    const IngestResult r = ingest_jsonl(file, fields);
    REQUIRE(r.programs.size() == 2);
    CHECK(r.programs[0].id == "python_1");
    CHECK(r.programs[0].title == "one");
    CHECK(r.programs[0].origin == Origin::Corpus);
    CHECK(r.programs[1].id == "7");
    std::vector<std::size_t> lines;
    for (const auto& rej : r.rejected) lines.push_back(rej.line.value_or(0));
    CHECK(lines == std::vector<std::size_t>{3, 4, 5, 6, 8});
    CHECK_THROWS_AS(parse_field_map("bogus=x"), ConfigError);
}

TEST_CASE("digests") {
    CHECK(digest::sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(digest::fields_hex({"ab", "c"}) != digest::fields_hex({"a", "bc"}));
    CHECK(digest::fields_hex({"a"}).size() == 64);
    CHECK(digest::fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(digest::fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("atomic_write skips identical content and survives injected faults") {
    TempDir dir;
    const fs::path f = dir.path / "x.json";
    CHECK(fsutil::atomic_write(f, "one"));
    CHECK_FALSE(fsutil::atomic_write(f, "one"));
    fsutil::set_fault_hook([](fsutil::WriteStage stage, const fs::path&) {
        if (stage == fsutil::WriteStage::TempPartial) throw std::runtime_error("crash");
    });
    CHECK_THROWS(fsutil::atomic_write(f, "two"));
    fsutil::set_fault_hook(nullptr);
    CHECK(fsutil::read_file(f) == "one");
    std::size_t temps = 0;
    for (const auto& e : fs::directory_iterator(dir.path)) temps += fsutil::is_temp_file(e.path());
    CHECK(temps == 1);
    CHECK(fsutil::atomic_write(f, "two"));
    CHECK(fsutil::read_file(f) == "two");
    CHECK_THROWS_AS(fsutil::read_file(dir.path / "nope"), IoError);
}
