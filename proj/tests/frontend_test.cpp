#include <gtest/gtest.h>

#include "arraylog/builtins.hpp"
#include "arraylog/parser.hpp"
#include "arraylog/program.hpp"

using namespace arraylog;

TEST(Parser, ReachProgram) {
    auto r = parse_program(
        ".decl Edge(2)\n"
        "Reach(from, to) :- Edge(from, to).\n"
        "Reach(from, to) :- Edge(from, mid), Reach(mid, to).\n");
    ASSERT_TRUE(r.ok());
    EXPECT_EQ(r.prog.edbs.size(), 1u);
    EXPECT_EQ(r.prog.rules.size(), 2u);
    EXPECT_EQ(r.prog.idb_relations(),
              (std::vector<std::string>{"Reach"}));
    EXPECT_EQ(*r.prog.arity_of("Reach"), 2u);
}

TEST(Parser, EmptyBodyIsSyntaxError) {
    auto r = parse_program("Reach(x, y) :- .\n");
    ASSERT_FALSE(r.ok());
    EXPECT_EQ(r.diagnostics[0].kind, diagnostic_kind::syntax);
    EXPECT_EQ(r.diagnostics[0].line, 1);
}

TEST(Parser, CommentsAndConstants) {
    auto r = parse_program(
        "% a comment line\n"
        ".decl E(2)\n"
        "P(x, 7) :- E(x, 3), E(x, x). % trailing comment\n");
    ASSERT_TRUE(r.ok());
    const rule& rl = r.prog.rules[0];
    EXPECT_TRUE(rl.head.terms[1].is_constant);
    EXPECT_EQ(rl.head.terms[1].value, 7u);
    EXPECT_TRUE(rl.body[0].terms[1].is_constant);
}

TEST(Parser, InequalityConstraints) {
    auto r = parse_program(
        ".decl Edge(2)\n"
        "SG(x, y) :- Edge(p, x), Edge(p, y), x != y.\n");
    ASSERT_TRUE(r.ok());
    ASSERT_EQ(r.prog.rules[0].constraints.size(), 1u);
    EXPECT_EQ(r.prog.rules[0].constraints[0].lhs, "x");
    EXPECT_EQ(r.prog.rules[0].constraints[0].rhs, "y");
}

TEST(Parser, ArityMismatchDiagnostic) {
    auto r = parse_program(
        ".decl E(2)\n"
        "P(x) :- E(x, y).\n"
        "P(x, y) :- E(x, y).\n");
    ASSERT_FALSE(r.ok());
    EXPECT_EQ(r.diagnostics[0].kind, diagnostic_kind::arity_mismatch);
    EXPECT_EQ(r.diagnostics[0].line, 3);
}

TEST(Parser, UnknownRelationDiagnostic) {
    auto r = parse_program(
        ".decl E(2)\n"
        "P(x, y) :- E(x, y), Ghost(x).\n");
    ASSERT_FALSE(r.ok());
    EXPECT_EQ(r.diagnostics[0].kind, diagnostic_kind::unknown_relation);
    EXPECT_NE(r.diagnostics[0].message.find("Ghost"), std::string::npos);
}

TEST(Parser, RangeRestrictionDiagnostics) {
    auto head_var = parse_program(
        ".decl E(2)\n"
        "P(x, z) :- E(x, y).\n");
    ASSERT_FALSE(head_var.ok());
    EXPECT_EQ(head_var.diagnostics[0].kind,
              diagnostic_kind::range_restriction);

    auto constraint_var = parse_program(
        ".decl E(2)\n"
        "P(x, y) :- E(x, y), x != q.\n");
    ASSERT_FALSE(constraint_var.ok());
    EXPECT_EQ(constraint_var.diagnostics[0].kind,
              diagnostic_kind::range_restriction);
}

TEST(Parser, EdbAsRuleHeadRejected) {
    auto r = parse_program(
        ".decl E(2)\n"
        "E(x, y) :- E(y, x).\n");
    ASSERT_FALSE(r.ok());
    EXPECT_EQ(r.diagnostics[0].kind, diagnostic_kind::edb_rule_head);
}

TEST(Parser, MalformedInputsNeverCrash) {
    for (const char* src :
         {".", ".decl", ".decl E", ".decl E(", ".decl E(x)",
          "P(x :- E(x).", "P(x) :- E(x)", "P(x) :- , .", "123", "!=",
          "P() :- E().", "P(x) :- x != .",
          ".decl E(0)", "P(x) :- E(x), !! .",
          "P(18446744073709551615) :- E(x)."}) {
        auto r = parse_program(src);
        EXPECT_FALSE(r.ok()) << src;
    }
}

TEST(Parser, EmptySourceIsAnEmptyProgram) {
    for (const char* src : {"", "   \n", "% only a comment\n"}) {
        auto r = parse_program(src);
        EXPECT_TRUE(r.ok()) << src;
        EXPECT_TRUE(r.prog.rules.empty());
        EXPECT_TRUE(r.prog.edbs.empty());
    }
}

TEST(Parser, DuplicateRulesAndAtomsAccepted) {
    auto r = parse_program(
        ".decl E(2)\n"
        "P(x, y) :- E(x, y), E(x, y).\n"
        "P(x, y) :- E(x, y), E(x, y).\n");
    EXPECT_TRUE(r.ok());
    EXPECT_EQ(r.prog.rules.size(), 2u);
}

TEST(Parser, PrettyPrintRoundTripIsAFixedPoint) {
    for (const char* name : {"reach", "sg", "cspa"}) {
        program p = builtin_program(name);
        std::string printed = pretty_print(p);
        auto reparsed = parse_program(printed);
        ASSERT_TRUE(reparsed.ok()) << printed;
        EXPECT_EQ(reparsed.prog, p);
        EXPECT_EQ(pretty_print(reparsed.prog), printed);
    }
}

TEST(Builtins, ReachShape) {
    program p = builtin_program("reach");
    EXPECT_EQ(p.edbs.size(), 1u);
    EXPECT_EQ(p.rules.size(), 2u);
    auto classes = classify_rules(p);
    EXPECT_EQ(classes.nonrecursive, (std::vector<std::size_t>{0}));
    EXPECT_EQ(classes.recursive, (std::vector<std::size_t>{1}));
}

TEST(Builtins, SgShape) {
    program p = builtin_program("sg");
    EXPECT_EQ(p.rules.size(), 2u);
    EXPECT_EQ(p.rules[0].constraints.size(), 1u);
    auto classes = classify_rules(p);
    EXPECT_EQ(classes.nonrecursive.size(), 1u);
    EXPECT_EQ(classes.recursive.size(), 1u);
}

TEST(Builtins, CspaShape) {
    program p = builtin_program("cspa");
    EXPECT_EQ(p.edbs.size(), 2u);
    EXPECT_EQ(p.rules.size(), 10u);
    EXPECT_EQ(p.idb_relations().size(), 3u);
    auto classes = classify_rules(p);
    EXPECT_EQ(classes.nonrecursive.size(), 5u);
    EXPECT_EQ(classes.recursive.size(), 5u);
}

TEST(Builtins, UnknownNameRejected) {
    EXPECT_THROW(builtin_program("nope"), usage_error);
}

TEST(Classify, PartitionsAllRules) {
    program p = builtin_program("cspa");
    auto classes = classify_rules(p);
    std::set<std::size_t> all;
    for (auto i : classes.nonrecursive) all.insert(i);
    for (auto i : classes.recursive) all.insert(i);
    EXPECT_EQ(all.size(), p.rules.size());
}

TEST(Classify, NoIdbBodiesMeansNoRecursion) {
    auto r = parse_program(
        ".decl E(2)\n"
        "P(x, y) :- E(x, y).\n"
        "Q(y, x) :- E(x, y).\n");
    ASSERT_TRUE(r.ok());
    auto classes = classify_rules(r.prog);
    EXPECT_TRUE(classes.recursive.empty());
    EXPECT_EQ(classes.nonrecursive.size(), 2u);
}

TEST(Classify, DownstreamOfACycleCountsAsRecursive) {
    // B grows inside the loop, so H must be re-derived there too.
    auto r = parse_program(
        ".decl E(2)\n"
        "C(x, y) :- E(x, y).\n"
        "C(x, y) :- C(x, z), E(z, y).\n"
        "B(x, y) :- C(x, y).\n"
        "H(x, y) :- B(x, y).\n");
    ASSERT_TRUE(r.ok());
    auto classes = classify_rules(r.prog);
    EXPECT_EQ(classes.recursive.size(), 3u);  // C-rec, B, H
    EXPECT_EQ(classes.nonrecursive.size(), 1u);
}
