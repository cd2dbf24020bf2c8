#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "core/corpus.hpp"
#include "core/rng.hpp"
#include "support/fixtures.hpp"
#include "support/tempdir.hpp"

using namespace badbox;
using testsupport::TempDir;

TEST_CASE("voc import: hand-written fixture") {
    TempDir tmp;
    const auto fx = testsupport::write_voc_fixture(tmp.path());
    const ImportResult result = import_voc(fx.annotation_dir, fx.image_dir, fx.split_list);
    const Dataset& d = result.dataset;

    CHECK(d.images.size() == 3);
    CHECK(d.categories.size() == 20); // default vocabulary
    CHECK(result.report.rejected.empty());

    std::size_t total_objects = 0;
    for (const auto& rec : d.images) total_objects += rec.objects.size();
    CHECK(total_objects == 6);

    // corner (0,0,10,10) -> center (5,5), size (10,10)
    const AnnotatedObject& first = d.images[0].objects[0];
    CHECK(first.cx == 5.0);
    CHECK(first.cy == 5.0);
    CHECK(first.w == 10.0);
    CHECK(first.h == 10.0);
    CHECK(first.category_id == d.categories.id_of("person"));
    CHECK_FALSE(first.difficult);

    // difficult flag preserved
    CHECK(d.images[2].objects[0].difficult);
}

TEST_CASE("voc import: empty split list yields empty dataset with valid table") {
    TempDir tmp;
    const auto fx = testsupport::write_voc_fixture(tmp.path());
    const std::string empty_split = tmp.sub("empty.txt");
    std::ofstream(empty_split).close();
    const ImportResult result = import_voc(fx.annotation_dir, fx.image_dir, empty_split);
    CHECK(result.dataset.images.empty());
    CHECK(result.dataset.categories.size() == 20);
}

TEST_CASE("voc import: missing annotation file names the image id") {
    TempDir tmp;
    const auto fx = testsupport::write_voc_fixture(tmp.path());
    std::ofstream(fx.split_list, std::ios::app) << "000099\n";
    CHECK_THROWS_WITH_AS(import_voc(fx.annotation_dir, fx.image_dir, fx.split_list),
                         doctest::Contains("000099"), Error);
}

TEST_CASE("voc import: malformed XML reports file and line") {
    TempDir tmp;
    const auto fx = testsupport::write_voc_fixture(tmp.path());
    std::ofstream((std::filesystem::path(fx.annotation_dir) / "000001.xml").string())
        << "<annotation>\n<size><width>64</width>\n"; // truncated
    try {
        import_voc(fx.annotation_dir, fx.image_dir, fx.split_list);
        FAIL("expected parse error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::parse);
        const std::string msg = e.what();
        CHECK(msg.find("000001.xml") != std::string::npos);
        CHECK(msg.find("line") != std::string::npos);
    }
}

TEST_CASE("voc import: unknown category name is listed") {
    TempDir tmp;
    const auto fx = testsupport::write_voc_fixture(tmp.path());
    std::ofstream((std::filesystem::path(fx.annotation_dir) / "000001.xml").string())
        << "<annotation><filename>000001.png</filename>"
           "<size><width>64</width><height>48</height></size>"
           "<object><name>gremlin</name><difficult>0</difficult>"
           "<bndbox><xmin>1</xmin><ymin>1</ymin><xmax>9</xmax><ymax>9</ymax></bndbox>"
           "</object></annotation>";
    CHECK_THROWS_WITH_AS(import_voc(fx.annotation_dir, fx.image_dir, fx.split_list),
                         doctest::Contains("gremlin"), Error);
}

TEST_CASE("voc import: custom class list replaces the default vocabulary") {
    TempDir tmp;
    const auto fx = testsupport::write_voc_fixture(tmp.path());
    const ImportResult result =
        import_voc(fx.annotation_dir, fx.image_dir, fx.split_list, {"person", "dog", "car"});
    CHECK(result.dataset.categories.size() == 3);
}

TEST_CASE("coco import: hand-written fixture") {
    TempDir tmp;
    const std::string json_path = testsupport::write_coco_fixture(tmp.path());
    const ImportResult result =
        import_coco(json_path, (std::filesystem::path(tmp.path()) / "images").string());
    const Dataset& d = result.dataset;

    CHECK(d.images.size() == 5);
    CHECK(d.categories.size() == 3);

    // kept = 9 annotations - 1 zero-area rejection
    std::size_t total = 0;
    std::size_t person = 0, dog = 0, car = 0;
    const int person_id = d.categories.id_of("person");
    const int dog_id = d.categories.id_of("dog");
    for (const auto& rec : d.images) {
        total += rec.objects.size();
        for (const auto& o : rec.objects) {
            if (o.category_id == person_id) ++person;
            else if (o.category_id == dog_id) ++dog;
            else ++car;
        }
    }
    CHECK(total == 8);
    CHECK(person == 4);
    CHECK(dog == 2);
    CHECK(car == 2);

    REQUIRE(result.report.rejected.size() == 1);
    CHECK(result.report.rejected[0].annotation_id == "9");
    CHECK(result.report.rejected[0].reason == "zero-area box");

    // [0,0,10,10] -> center (5,5), size (10,10)
    const AnnotatedObject& first = d.images[0].objects[0];
    CHECK(first.cx == 5.0);
    CHECK(first.cy == 5.0);
    CHECK(first.w == 10.0);
    CHECK(first.h == 10.0);

    // iscrowd -> difficult
    CHECK(d.images[2].objects[0].difficult);
}

TEST_CASE("coco import: dangling image reference names the annotation") {
    TempDir tmp;
    const std::string path = tmp.sub("bad.json");
    std::ofstream(path) << R"({
      "images": [{"id": 1, "file_name": "a.png", "width": 10, "height": 10}],
      "annotations": [{"id": 77, "image_id": 999, "category_id": 1, "bbox": [0,0,5,5], "iscrowd": 0}],
      "categories": [{"id": 1, "name": "person"}]
    })";
    CHECK_THROWS_WITH_AS(import_coco(path, tmp.path()), doctest::Contains("999"), Error);
}

TEST_CASE("manifest round-trip is lossless") {
    TempDir tmp;
    const auto fx = testsupport::write_voc_fixture(tmp.path());
    const Dataset d = import_voc(fx.annotation_dir, fx.image_dir, fx.split_list).dataset;

    const std::string manifest = tmp.sub("manifest.json");
    export_manifest(d, manifest);
    const Dataset loaded = load_manifest(manifest);
    CHECK(loaded == d);
}

TEST_CASE("manifest round-trip preserves provenance") {
    TempDir tmp;
    const auto fx = testsupport::write_voc_fixture(tmp.path());
    Dataset d = import_voc(fx.annotation_dir, fx.image_dir, fx.split_list).dataset;

    AttackProvenance prov;
    prov.kind = ProvenanceKind::test_variant;
    prov.spec = {"person", "dog", 0.005, 29, 29, 1.0, PlacementMode::random_location, 42};
    prov.master_seed = 42;
    prov.selected_image_ids = {"000001", "000002"};
    prov.part_attack_categories = std::vector<std::string>{"dog", "car", "person"};
    d.provenance = prov;

    const std::string manifest = tmp.sub("poisoned.json");
    export_manifest(d, manifest);
    const Dataset loaded = load_manifest(manifest);
    CHECK(loaded == d);
    REQUIRE(loaded.provenance.has_value());
    CHECK(loaded.provenance->spec.placement_mode == PlacementMode::random_location);
}

TEST_CASE("manifest with unknown schema version is rejected") {
    TempDir tmp;
    const std::string path = tmp.sub("bad.json");
    std::ofstream(path) << R"({"schema_version": 99, "categories": [], "images": []})";
    CHECK_THROWS_WITH_AS(load_manifest(path), doctest::Contains("99"), Error);
}

TEST_CASE("manifest with duplicate image_id is rejected") {
    TempDir tmp;
    const std::string path = tmp.sub("dup.json");
    std::ofstream(path) << R"({
      "schema_version": 1,
      "categories": [{"id": 0, "name": "person"}],
      "images": [
        {"image_id": "a", "pixel_path": "a.png", "width": 10, "height": 10, "objects": []},
        {"image_id": "a", "pixel_path": "b.png", "width": 10, "height": 10, "objects": []}
      ]
    })";
    CHECK_THROWS_WITH_AS(load_manifest(path), doctest::Contains("duplicate image_id"), Error);
}

TEST_CASE("images_with_class") {
    TempDir tmp;
    const auto fx = testsupport::write_voc_fixture(tmp.path());
    const Dataset d = import_voc(fx.annotation_dir, fx.image_dir, fx.split_list).dataset;

    SUBCASE("returns ids in manifest order") {
        const auto ids = images_with_class(d, d.categories.id_of("person"));
        REQUIRE(ids.size() == 2); // 000003's person is difficult
        CHECK(ids[0] == "000001");
        CHECK(ids[1] == "000002");
    }
    SUBCASE("category present only as difficult yields nothing") {
        Dataset only_difficult = d;
        for (auto& rec : only_difficult.images)
            for (auto& o : rec.objects)
                if (o.category_id == d.categories.id_of("person")) o.difficult = true;
        CHECK(images_with_class(only_difficult, d.categories.id_of("person")).empty());
    }
    SUBCASE("unknown id is an error") {
        CHECK_THROWS_WITH_AS(images_with_class(d, 999), doctest::Contains("999"), Error);
    }
}

TEST_CASE("corner/center conversion is an involution on integer boxes") {
    DetRng rng(7);
    for (int i = 0; i < 500; ++i) {
        const int xmin = rng.next_int(0, 500);
        const int ymin = rng.next_int(0, 500);
        const int xmax = xmin + rng.next_int(1, 400);
        const int ymax = ymin + rng.next_int(1, 400);

        const double cx = (xmin + xmax) / 2.0;
        const double cy = (ymin + ymax) / 2.0;
        const double w = xmax - xmin;
        const double h = ymax - ymin;

        CHECK(cx - w / 2.0 == static_cast<double>(xmin));
        CHECK(cx + w / 2.0 == static_cast<double>(xmax));
        CHECK(cy - h / 2.0 == static_cast<double>(ymin));
        CHECK(cy + h / 2.0 == static_cast<double>(ymax));
    }
}

TEST_CASE("validate_dataset rejects out-of-image objects") {
    Dataset d;
    d.categories = CategoryTable({{0, "person"}});
    ImageRecord rec;
    rec.image_id = "a";
    rec.pixel_path = "/nonexistent/a.png";
    rec.width = 10;
    rec.height = 10;
    rec.objects.push_back({50.0, 50.0, 4.0, 4.0, 0, false});
    d.images.push_back(rec);
    CHECK_THROWS_AS(validate_dataset(d), Error);
}
