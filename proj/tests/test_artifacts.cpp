// The shipped prompt and data files must be byte-identical to the strings
// the code actually uses, so what is in the repository is what runs.
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "lifebench/lifelog/registry.hpp"
#include "lifebench/prompts.hpp"
#include "lifebench/store/store.hpp"

namespace {

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE_MESSAGE(in.good(), path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::filesystem::path repo_root() { return LIFEBENCH_SOURCE_DIR; }

}  // namespace

TEST_CASE("prompts/ files mirror the embedded prompt strings") {
    const auto dir = repo_root() / "prompts";
    size_t checked = 0;
    for (const auto& [name, text] : lifebench::prompts::registry()) {
        CHECK_MESSAGE(slurp(dir / name) == *text, name);
        ++checked;
    }
    CHECK(checked >= 7);
    // and nothing extra lives there
    size_t on_disk = 0;
    for (const auto& e : std::filesystem::directory_iterator(dir)) {
        (void)e;
        ++on_disk;
    }
    CHECK(on_disk == checked);
}

TEST_CASE("data/schema.sql matches the DDL embedded in prompts") {
    CHECK(slurp(repo_root() / "data" / "schema.sql") == lifebench::schema_ddl());
}

TEST_CASE("data/metric_registry.csv matches the compiled-in registry") {
    CHECK(slurp(repo_root() / "data" / "metric_registry.csv") == lifebench::registry_csv());
}
