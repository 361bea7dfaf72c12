#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <limits>

#include "cmpslab/csv.hpp"
#include "cmpslab/errors.hpp"

using namespace cmpslab;

TEST(FormatReal, SeventeenDigitsRoundTrip) {
    for (double x : {0.1, 1.0 / 3.0, 2.5e-300, -1234567.891011, 0.63 * 0.63}) {
        const std::string s = format_real(x);
        EXPECT_EQ(std::stod(s), x) << s;
    }
    EXPECT_EQ(format_real(0.1), "0.10000000000000001");
}

TEST(Csv, QuotingRoundTrip) {
    CsvTable t;
    t.header = {"name", "value"};
    t.add_row({"plain", "1"});
    t.add_row({"has,comma", "2"});
    t.add_row({"has \"quotes\"", "3"});
    t.add_row({"multi\nline", "4"});
    t.add_row({"", "5"});
    const std::string text = to_csv(t);
    EXPECT_NE(text.find("\"has,comma\""), std::string::npos);
    EXPECT_NE(text.find("\r\n"), std::string::npos);
    const CsvTable back = parse_csv(text);
    EXPECT_EQ(back.header, t.header);
    EXPECT_EQ(back.rows, t.rows);
}

TEST(Csv, AcceptsBareNewlinesAndNoTrailingNewline) {
    const CsvTable t = parse_csv("a,b\n1,2\n3,4");
    ASSERT_EQ(t.rows.size(), 2u);
    EXPECT_EQ(t.rows[1][1], "4");
}

TEST(Csv, MalformedInput) {
    EXPECT_THROW(parse_csv(""), CsvError);
    EXPECT_THROW(parse_csv("a,b\n1\n"), CsvError);
    EXPECT_THROW(parse_csv("a,b\n\"1,2\n"), CsvError);
    EXPECT_THROW(parse_csv("a,b\n1x\"y,2\n"), CsvError);
    CsvTable t;
    t.header = {"a"};
    EXPECT_THROW(t.add_row({"1", "2"}), CsvError);
    EXPECT_THROW(to_csv(CsvTable{}), CsvError);
    EXPECT_THROW(t.column("b"), CsvError);
}

TEST(ValidateCsv, TypesAndHeader) {
    const std::vector<CsvColumn> schema{{"x", CsvType::Real}, {"n", CsvType::Integer},
                                        {"ok", CsvType::Bool}, {"s", CsvType::Text}};
    CsvTable t;
    t.header = {"x", "n", "ok", "s"};
    t.add_row({"1.5e-3", "7", "true", "anything"});
    t.add_row({"nan", "-2", "false", ""});
    t.add_row({"inf", "0", "true", "x"});
    EXPECT_NO_THROW(validate_csv(t, schema));

    CsvTable bad = t;
    bad.rows[1][0] = "abc";
    EXPECT_THROW(validate_csv(bad, schema), CsvError);
    bad = t;
    bad.rows[0][1] = "1.5";
    EXPECT_THROW(validate_csv(bad, schema), CsvError);
    bad = t;
    bad.rows[0][2] = "yes";
    EXPECT_THROW(validate_csv(bad, schema), CsvError);
    bad = t;
    bad.header[0] = "y";
    EXPECT_THROW(validate_csv(bad, schema), CsvError);
}

TEST(WriteCsv, AtomicWriteAndRead) {
    const auto dir = std::filesystem::temp_directory_path() / "cmpslab_csv_test";
    std::filesystem::remove_all(dir);
    CsvTable t;
    t.header = {"x"};
    t.add_row({format_real(0.1)});
    write_csv(dir / "sub" / "t.csv", t);
    EXPECT_EQ(read_csv(dir / "sub" / "t.csv").rows, t.rows);
    for (const auto& entry : std::filesystem::directory_iterator(dir / "sub")) {
        EXPECT_EQ(entry.path().filename(), "t.csv");
    }
    EXPECT_THROW(read_file(dir / "missing.csv"), CsvError);
    std::filesystem::remove_all(dir);
}
