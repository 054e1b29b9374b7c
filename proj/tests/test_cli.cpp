#include <doctest.h>

#include <json.hpp>

#include "support.hpp"

using nlohmann::json;
using testing::fixture;
using testing::run_cli;

TEST_CASE("version and usage errors") {
    const auto v = run_cli({"--version"});
    CHECK(v.code == 0);
    CHECK(v.out.find("pimpl-sentinel 1.0.0") != std::string::npos);
    CHECK(run_cli({}).code == 2);
    CHECK(run_cli({"frobnicate"}).code == 2);
    CHECK(run_cli({"lint"}).code == 2);
    CHECK(run_cli({"lint", fixture("clean_pkg"), "--format", "xml"}).code == 2);
    CHECK(run_cli({"surface", fixture("clean_pkg"), "--json", "--text"}).code == 2);
    CHECK(run_cli({"--help"}).code == 0);
}

TEST_CASE("lint exit codes") {
    CHECK(run_cli({"lint", fixture("clean_pkg")}).code == 0);
    const auto leaky = run_cli({"lint", fixture("leaky_pkg"), "--config", fixture("configs/leaky.json")});
    CHECK(leaky.code == 1);
    CHECK(leaky.out.find("R005") != std::string::npos);
    // warnings and infos alone do not fail the run
    const auto soft = run_cli({"lint", fixture("leaky_pkg"), "--config", fixture("configs/leaky.json"), "--disable",
                               "R001", "--disable", "R002", "--disable", "R003"});
    CHECK(soft.code == 0);
    CHECK(run_cli({"lint", fixture("leaky_pkg"), "--config", fixture("configs/bad_rule.json")}).code == 2);
    CHECK(run_cli({"lint", fixture("leaky_pkg"), "--config", fixture("configs/bad_threshold.json")}).code == 2);
    CHECK(run_cli({"lint", fixture("leaky_pkg"), "--config", fixture("configs/not_json.json")}).code == 2);
    CHECK(run_cli({"lint", fixture("leaky_pkg"), "--config", fixture("configs/absent.json")}).code == 2);
    CHECK(run_cli({"lint", fixture("leaky_pkg"), "--enable", "R042"}).code == 2);
    CHECK(run_cli({"lint", fixture("leaky_pkg"), "--enable", "R001", "--disable", "R001"}).code == 2);
    CHECK(run_cli({"lint", fixture("no_such_dir")}).code == 2);
}

TEST_CASE("enable narrows a config rule list") {
    testing::TempDir tmp;
    testing::write_tree(tmp.path(), {{"only.json", R"({"rules": ["R004"]})"}});
    const auto r = run_cli({"lint", fixture("leaky_pkg"), "--config", (tmp.path() / "only.json").string(), "--format",
                            "json"});
    CHECK(r.code == 0);
    const json j = json::parse(r.out);
    REQUIRE(j["diagnostics"].size() == 1);
    CHECK(j["diagnostics"][0]["code"] == "R004");
    const auto more = run_cli({"lint", fixture("leaky_pkg"), "--config", (tmp.path() / "only.json").string(),
                               "--enable", "R003", "--format", "json"});
    CHECK(more.code == 1);
    CHECK(json::parse(more.out)["diagnostics"].size() == 2);
}

TEST_CASE("lint JSON schema") {
    const auto r = run_cli({"lint", fixture("leaky_pkg"), "--config", fixture("configs/leaky.json"), "--format", "json"});
    const json j = json::parse(r.out);
    CHECK(j["version"] == 1);
    REQUIRE(j["diagnostics"].is_array());
    for (const auto& d : j["diagnostics"]) {
        CHECK(d["code"].is_string());
        CHECK(d["severity"].is_string());
        CHECK(d["module"].is_string());
        CHECK(d["line"].is_number_integer());
        CHECK(d["col"].is_number_integer());
        CHECK(d["end_line"].is_number_integer());
        CHECK(d["end_col"].is_number_integer());
        CHECK(d["message"].is_string());
        CHECK((d["suggestion"].is_string() || d["suggestion"].is_null()));
        CHECK(d["fingerprint"].get<std::string>().size() == 16);
    }
    CHECK(j["summary"].is_object());
    // byte-identical across runs
    CHECK(run_cli({"lint", fixture("leaky_pkg"), "--config", fixture("configs/leaky.json"), "--format", "json"}).out ==
          r.out);
}

TEST_CASE("surface and diff") {
    const auto s = run_cli({"surface", fixture("mylib"), "--json"});
    CHECK(s.code == 0);
    const json j = json::parse(s.out);
    CHECK(j["version"] == 1);
    REQUIRE(j["modules"]["mylib"].size() == 2);
    CHECK(j["modules"]["mylib"][0]["binding"] == "lazy");
    CHECK(run_cli({"surface", fixture("mylib")}).out.find("read_image") != std::string::npos);

    const auto rename = run_cli({"diff", fixture("core_rename/v1.json"), fixture("core_rename/v2_rename.json"), "--json"});
    CHECK(rename.code == 0);
    const json d = json::parse(rename.out);
    for (const char* key : {"added", "removed", "origin_moved", "unchanged"}) CHECK(d[key].is_array());
    CHECK(d["removed"].empty());
    CHECK(d["origin_moved"].size() == 6);
    CHECK(run_cli({"diff", fixture("core_rename/v1.json"), fixture("core_rename/v2_rename.json"), "--strict"}).code == 1);
    CHECK(run_cli({"diff", fixture("core_rename/v1"), fixture("core_rename/v2_drop")}).code == 1);
    CHECK(run_cli({"diff", fixture("core_rename/v1.json"), fixture("configs/leaky.json")}).code == 2);
}

TEST_CASE("detect and graph") {
    const auto d = run_cli({"detect", fixture("messenger_app"), "--json"});
    CHECK(d.code == 0);
    const json j = json::parse(d.out);
    CHECK(j["version"] == 1);
    CHECK(run_cli({"detect", fixture("widget_app")}).out.find("coverage 3/3") != std::string::npos);
    CHECK(run_cli({"detect", fixture("widget_app"), "--impl-pattern", "("}).code == 2);
    CHECK(run_cli({"detect", fixture("widget_app/widget.py")}).code == 0);

    const auto g = run_cli({"graph", fixture("leaky_pkg"), "--json"});
    CHECK(g.code == 0);
    const json gj = json::parse(g.out);
    CHECK(gj["edges"].is_array());
    REQUIRE(gj["cycles"].size() == 1);
    CHECK(gj["cycles"][0] == json::array({"leaky_pkg.ring_a", "leaky_pkg.ring_b"}));
    CHECK(run_cli({"graph", fixture("widget_app"), "--cycles"}).out == "no cycles\n");
}

TEST_CASE("scaffold writes files and refuses collisions") {
    testing::TempDir tmp;
    testing::write_tree(tmp.path(), {{"src/cache.py", "class Cache:\n    def __init__(self):\n        self._d = {}\n"
                                                      "    def get(self, k):\n        return self._d.get(k)\n"}});
    const std::string src = (tmp.path() / "src/cache.py").string();
    const std::string out = (tmp.path() / "out").string();
    const auto r = run_cli({"scaffold", src, "Cache", "--out", out});
    CHECK(r.code == 0);
    const json manifest = json::parse(r.out);
    CHECK(manifest["version"] == 1);
    CHECK(manifest["files"] == json::array({"cache.py", "impl/_cache.py", "impl/__init__.py"}));
    CHECK(std::filesystem::exists(tmp.path() / "out/impl/_cache.py"));
    CHECK(run_cli({"lint", out}).code == 0);
    CHECK(run_cli({"scaffold", src, "Cache", "--out", out}).code == 2);
    CHECK(run_cli({"scaffold", src, "Cache", "--out", out, "--overwrite"}).code == 0);
    CHECK(run_cli({"scaffold", src, "Missing", "--out", out, "--overwrite"}).code == 2);
    CHECK(run_cli({"scaffold", src, "Cache", "--out", out, "--overwrite", "--lazy", "bad"}).code == 2);
    CHECK(run_cli({"scaffold", src, "Cache", "--out", out, "--overwrite", "--factory", "a=A"}).code == 2);
    const auto fac = run_cli({"scaffold", src, "Cache", "--out", out, "--overwrite", "--factory", "mem=Memory",
                              "--factory", "disk=store.disk:Disk"});
    CHECK(fac.code == 0);
    CHECK(testing::read_text(out + "/cache.py").find("import store.disk as _disk") != std::string::npos);
}
