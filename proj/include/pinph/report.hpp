#pragma once

// Result files and the tabular outputs built from them.

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pinph/model.hpp"
#include "pinph/stats.hpp"

namespace pinph::report {

/// One line of a results file: an asset-window estimate or its failure.
struct ResultRow {
    std::string asset_id;
    std::string period_label;
    int n_days{0};
    std::optional<EstimationResult> result;
    std::string error;
};

/// Header: ticker,period,n_days,alpha,delta,mu,eps_b,eps_s,eps_bh,eps_sh,
/// log_likelihood,pin,ph,n_restarts,converged,flags,error. Reals use
/// round-trip precision so reruns are byte-identical.
void write_results(std::ostream& out, std::span<const ResultRow> rows);
std::vector<ResultRow> parse_results(std::istream& in);

/// Per-asset PIN/PH table with market cap in millions and transaction counts.
struct FixtureRow {
    std::string ticker;
    double pin{0.0};
    double ph{0.0};
    double market_cap{0.0};  ///< units (file holds millions)
    double transactions{0.0};
};
std::vector<FixtureRow> parse_fixture(std::istream& in);

struct Record {
    stats::PanelRow row;
    std::optional<ParameterSet> params;
};

struct Regression {
    std::string dependent;
    stats::OlsFit fit;
};

struct Tables {
    std::string scheme_label;  ///< "quarterly", "monthly" or "whole-period"
    int period_count{0};
    std::vector<stats::SummaryRow> summary;
    stats::DifferenceMatrix pin_differences;
    stats::DifferenceMatrix ph_differences;
    std::vector<Regression> market_cap;  ///< per-asset averages, PH then PIN
    std::vector<Regression> volume;
    std::optional<Regression> panel;     ///< PH on cap, volume, Q4 dummy and PIN
    std::optional<stats::SizeProfile> size_profile;
    std::vector<std::string> warnings;
};

struct TableOptions {
    int size_groups{9};
    int group_size{5};
};

Tables build_tables(std::span<const Record> records, const std::string& scheme_label,
                    const TableOptions& options = {});

void write_summary(std::ostream& out, const Tables& t);
void write_differences(std::ostream& out, const stats::DifferenceMatrix& m);
void write_regressions(std::ostream& out, std::span<const Regression> regressions);
void write_size_profile(std::ostream& out, const stats::SizeProfile& profile);
void write_size_chart_svg(std::ostream& out, const stats::SizeProfile& profile);
void write_json(std::ostream& out, const Tables& t, const std::string& provenance);

}  // namespace pinph::report
