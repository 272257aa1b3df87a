#include "cnma/network.hpp"

#include "helpers.hpp"

#include <doctest.h>

#include <sstream>

using namespace cnma;

TEST_CASE("treatment labels are unordered unit sets") {
    const auto ab = TreatmentLabel::parse("A+B");
    const auto ba = TreatmentLabel::parse(" B + A ");
    CHECK(ab == ba);
    CHECK(ab.key() == "A+B");
    CHECK(ab.display() == "A + B");
    CHECK(ab.size() == 2);
    CHECK(ab.contains("A"));
    CHECK(!ab.contains("C"));

    const auto spaced = TreatmentLabel::parse("Face-to-face CBT + SSRI");
    CHECK(spaced.units() == std::vector<std::string>{"Face-to-face CBT", "SSRI"});
}

TEST_CASE("label parsing rejects malformed input") {
    CHECK_THROWS_AS(TreatmentLabel::parse(""), ValidationError);
    CHECK_THROWS_AS(TreatmentLabel::parse("A+"), ValidationError);
    CHECK_THROWS_AS(TreatmentLabel::parse("+B"), ValidationError);
    CHECK_THROWS_AS(TreatmentLabel::parse("A+ +B"), ValidationError);
    CHECK_THROWS_AS(TreatmentLabel({std::vector<std::string>{"A:B"}}),
                    ValidationError);
    CHECK_THROWS_AS(TreatmentLabel(std::vector<std::string>{}), ValidationError);
}

TEST_CASE("treatment ordering sorts by size then units") {
    auto t = [](const char* s) { return TreatmentLabel::parse(s); };
    CHECK(t("D") < t("A+B"));
    CHECK(t("A") < t("D"));
    CHECK(t("A+B") < t("B+C"));
    CHECK(!(t("A+B") < t("B+A")));
    CHECK(!(t("B+A") < t("A+B")));
}

TEST_CASE("csv ingestion builds the expected network") {
    std::istringstream in(
        "studlab,treat1,treat2,TE,seTE\n"
        "s1,A,B + C,0.62,0.20\n"
        "s2,D,B + C,0.41,0.25\n"
        "s3,D,A + B,-0.30,0.22\n"
        "s4,A,E + F,1.05,0.30\n");
    const Network net = read_contrast_csv(in, "test");
    CHECK(net.contrasts.size() == 4);
    CHECK(net.studies.size() == 4);
    REQUIRE(net.treatments.size() == 5);
    // Sorted by (size, units): A, D, A+B, B+C, E+F.
    CHECK(net.treatments[0].display() == "A");
    CHECK(net.treatments[1].display() == "D");
    CHECK(net.treatments[2].display() == "A + B");
    CHECK(net.treatments[3].display() == "B + C");
    CHECK(net.treatments[4].display() == "E + F");
}

TEST_CASE("csv ingestion rejects malformed files") {
    auto parse = [](const std::string& text) {
        std::istringstream in(text);
        return read_contrast_csv(in, "test");
    };
    CHECK_THROWS_AS(parse(""), IoError);
    CHECK_THROWS_AS(parse("study,t1,t2,TE,seTE\n"), IoError); // wrong header
    CHECK_THROWS_AS(parse("studlab,treat1,treat2,TE,seTE\ns1,A,B,x,0.2\n"),
                    IoError);
    CHECK_THROWS_AS(parse("studlab,treat1,treat2,TE,seTE\ns1,A,B,0.5\n"),
                    IoError);
    CHECK_THROWS_AS(parse("studlab,treat1,treat2,TE,seTE\ns1,A,A,0.5,0.2\n"),
                    ValidationError); // self comparison
    CHECK_THROWS_AS(parse("studlab,treat1,treat2,TE,seTE\ns1,A,B,0.5,0\n"),
                    ValidationError); // zero se
    CHECK_THROWS_AS(parse("studlab,treat1,treat2,TE,seTE\ns1,A,B,0.5,-1\n"),
                    ValidationError);
    // "B+A" and "A+B" are the same treatment.
    CHECK_THROWS_AS(parse("studlab,treat1,treat2,TE,seTE\ns1,A+B,B+A,0.5,0.2\n"),
                    ValidationError);
}

TEST_CASE("quoted csv fields are supported") {
    std::istringstream in(
        "studlab,treat1,treat2,TE,seTE\n"
        "\"s,1\",\"A\",B,0.5,0.2\n");
    const Network net = read_contrast_csv(in, "test");
    CHECK(net.studies[0].id == "s,1");
}

TEST_CASE("multi-arm studies must be complete pairwise sets") {
    auto rows = [](std::vector<std::tuple<std::string, std::string, std::string>>
                       specs) {
        std::vector<Contrast> out;
        for (auto& [id, a, b] : specs) {
            Contrast c;
            c.study = id;
            c.treat1 = TreatmentLabel::parse(a);
            c.treat2 = TreatmentLabel::parse(b);
            c.effect = 0.1;
            c.se = 0.5;
            out.push_back(c);
        }
        return out;
    };

    // Two rows over three treatments: incomplete.
    CHECK_THROWS_AS(make_network(rows({{"s1", "A", "B"}, {"s1", "A", "C"}})),
                    ValidationError);
    // Duplicate comparison inside one study.
    CHECK_THROWS_AS(make_network(rows({{"s1", "A", "B"}, {"s1", "B", "A"}})),
                    ValidationError);
    // Complete three-arm set is fine.
    CHECK_NOTHROW(make_network(
        rows({{"s1", "A", "B"}, {"s1", "A", "C"}, {"s1", "B", "C"}})));
}

TEST_CASE("component catalog separates components, standalone and collapsed") {
    std::istringstream in(
        "studlab,treat1,treat2,TE,seTE\n"
        "s1,A,B + C,0.62,0.20\n"
        "s2,D,B + C,0.41,0.25\n"
        "s3,D,A + B,-0.30,0.22\n"
        "s4,A,E + F,1.05,0.30\n");
    const Network net = read_contrast_csv(in, "test");
    const ComponentCatalog cat = derive_component_catalog(net);

    // A appears alone and inside A+B; B in A+B and B+C; C is pulled in by B.
    CHECK(cat.components == std::vector<std::string>{"A", "B", "C"});
    // D only ever appears alone.
    REQUIRE(cat.standalone.size() == 1);
    CHECK(cat.standalone[0].display() == "D");
    // Neither E nor F touches the additive closure.
    REQUIRE(cat.collapsed.size() == 1);
    CHECK(cat.collapsed[0].key() == "E+F");

    CHECK(cat.parameter_labels() ==
          std::vector<std::string>{"A", "B", "C", "D", "E+F"});
}

TEST_CASE("catalog closure is all-or-none per treatment") {
    // Property: a multi-unit treatment never mixes component and
    // non-component units.
    for (std::uint64_t trial = 0; trial < 500; ++trial) {
        testutil::TestRng rng(1000 + trial);
        const Network net = testutil::random_network(rng);
        const ComponentCatalog cat = derive_component_catalog(net);
        for (const auto& t : net.treatments) {
            if (t.size() < 2) continue;
            int in = 0;
            for (const auto& u : t.units())
                in += cat.is_component(u) ? 1 : 0;
            CHECK((in == 0 || in == static_cast<int>(t.size())));
        }
        // Every observed treatment is classified exactly once.
        for (const auto& t : net.treatments) {
            int hits = 0;
            if (t.size() >= 2 && cat.is_component(t.units()[0])) ++hits;
            if (t.size() == 1 && cat.is_component(t.units()[0])) ++hits;
            for (const auto& s : cat.standalone) hits += (s == t) ? 1 : 0;
            for (const auto& c : cat.collapsed) hits += (c == t) ? 1 : 0;
            CHECK(hits == 1);
        }
    }
}

TEST_CASE("catalog derivation is deterministic") {
    testutil::TestRng rng(77);
    const Network net = testutil::random_network(rng);
    const ComponentCatalog a = derive_component_catalog(net);
    const ComponentCatalog b = derive_component_catalog(net);
    CHECK(a.components == b.components);
    CHECK(a.parameter_labels() == b.parameter_labels());
}

TEST_CASE("structural findings mention disconnection and single-study units") {
    std::istringstream in(
        "studlab,treat1,treat2,TE,seTE\n"
        "s1,A,B,0.5,0.2\n"
        "s2,C,D,0.5,0.2\n");
    const Network net = read_contrast_csv(in, "test");
    const auto findings = validate_network(net);
    bool disconnected = false;
    for (const auto& f : findings)
        disconnected |= f.find("disconnected") != std::string::npos;
    CHECK(disconnected);
}

TEST_CASE("connected network yields no disconnection finding") {
    std::istringstream in(
        "studlab,treat1,treat2,TE,seTE\n"
        "s1,A,B,0.5,0.2\n"
        "s2,B,C,0.5,0.2\n"
        "s3,A,C,0.1,0.3\n");
    const Network net = read_contrast_csv(in, "test");
    for (const auto& f : validate_network(net))
        CHECK(f.find("disconnected") == std::string::npos);
}

TEST_CASE("two-arm covariance block is the squared standard error") {
    std::istringstream in(
        "studlab,treat1,treat2,TE,seTE\n"
        "s1,A,B,0.5,0.2\n");
    const Network net = read_contrast_csv(in, "test");
    const Eigen::MatrixXd cov = multiarm_covariance(net, net.studies[0]);
    REQUIRE(cov.rows() == 1);
    CHECK(cov(0, 0) == doctest::Approx(0.04).epsilon(1e-12));
    // Heterogeneity inflates a two-arm contrast by tau2 (tau2/2 per arm).
    const Eigen::MatrixXd covr = multiarm_covariance(net, net.studies[0], 0.06);
    CHECK(covr(0, 0) == doctest::Approx(0.10).epsilon(1e-12));
}

TEST_CASE("three-arm covariance reconstructs shared-arm correlations") {
    // All three contrast variances equal 2 => every arm variance is 1.
    std::istringstream in(
        "studlab,treat1,treat2,TE,seTE\n"
        "s1,A,B,0.1,1.4142135623730951\n"
        "s1,A,C,0.2,1.4142135623730951\n"
        "s1,B,C,0.1,1.4142135623730951\n");
    const Network net = read_contrast_csv(in, "test");
    const Eigen::MatrixXd cov = multiarm_covariance(net, net.studies[0]);
    REQUIRE(cov.rows() == 3);
    // Row order is file order: (A,B), (A,C), (B,C); arms sorted A,B,C.
    CHECK(cov(0, 0) == doctest::Approx(2.0));
    CHECK(cov(1, 1) == doctest::Approx(2.0));
    CHECK(cov(2, 2) == doctest::Approx(2.0));
    CHECK(cov(0, 1) == doctest::Approx(1.0));  // share arm A
    CHECK(cov(0, 2) == doctest::Approx(-1.0)); // B on opposite sides
    CHECK(cov(1, 2) == doctest::Approx(1.0));  // share arm C
    // Symmetry.
    CHECK((cov - cov.transpose()).norm() == doctest::Approx(0.0));
}

TEST_CASE("inconsistent multi-arm standard errors are rejected") {
    // se^2 = (0.1, 0.1, 0.5) forces a negative arm variance.
    std::istringstream in(
        "studlab,treat1,treat2,TE,seTE\n"
        "s1,A,B,0.1,0.31622776601683794\n"
        "s1,A,C,0.2,0.31622776601683794\n"
        "s1,B,C,0.1,0.7071067811865476\n");
    const Network net = read_contrast_csv(in, "test");
    CHECK_THROWS_AS(multiarm_covariance(net, net.studies[0]), ValidationError);
}

TEST_CASE("four-arm covariance round-trips generated arm variances") {
    for (std::uint64_t trial = 0; trial < 200; ++trial) {
        testutil::TestRng rng(9000 + trial);
        std::vector<double> v(4);
        for (auto& x : v) x = 0.05 + rng.uniform();
        const std::vector<std::string> units = {"A", "B", "C", "D"};
        std::vector<Contrast> rows;
        for (int k = 0; k < 4; ++k)
            for (int l = k + 1; l < 4; ++l) {
                Contrast c;
                c.study = "s1";
                c.treat1 = TreatmentLabel({std::vector<std::string>{units[k]}});
                c.treat2 = TreatmentLabel({std::vector<std::string>{units[l]}});
                c.effect = 0.0;
                c.se = std::sqrt(v[k] + v[l]);
                rows.push_back(c);
            }
        const Network net = make_network(rows);
        const Eigen::MatrixXd cov = multiarm_covariance(net, net.studies[0]);
        // Diagonal reproduces the inputs; off-diagonals come from shared arms.
        int r = 0;
        for (int k = 0; k < 4; ++k)
            for (int l = k + 1; l < 4; ++l, ++r)
                CHECK(cov(r, r) == doctest::Approx(v[k] + v[l]).epsilon(1e-9));
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
        CHECK(es.eigenvalues().minCoeff() > -1e-10);
    }
}
