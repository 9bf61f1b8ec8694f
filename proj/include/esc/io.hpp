#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "esc/likelihood.hpp"
#include "esc/mcmc.hpp"
#include "esc/partition.hpp"

namespace esc {

// Loads a rectangular CSV of categorical fields (header row required, no
// missing cells). Values are dictionary-encoded per column in order of first
// appearance. Throws std::runtime_error naming the offending row on ragged
// input.
RecordTable load_records(const std::string& path);
std::vector<std::string> csv_header(const std::string& path);

// Truth file: CSV with header `record,entity`, one row per record, record
// ids 1..n (any order, each exactly once). Entity ids are arbitrary strings.
Partition load_truth(const std::string& path);

void write_records_csv(const std::string& path, const RecordTable& records);
void write_truth_csv(const std::string& path, const Partition& truth);

// Line-delimited trace: a `#` header carrying model/n/L, then one sample per
// line: iteration K r p beta_1..beta_L z_1..z_n. Doubles are printed with 17
// significant digits so read_trace(write_trace(t)) == t exactly.
void write_trace(const std::string& path, const Trace& trace);
Trace read_trace(const std::string& path);

// Flat key = value run configuration ('#' comments). Unknown keys are
// errors. Keys mirror ChainConfig; defaults are the reference analysis
// settings, so a data path alone is a valid run.
ChainConfig parse_run_config(std::istream& in);
ChainConfig load_run_config(const std::string& path);

// Command line entry point (subcommands: simulate, fit, prior-sample,
// asymptotics, evaluate, diagnose). Returns the process exit code: 0 ok,
// 2 usage error, 1 runtime failure.
int run_command(const std::vector<std::string>& args);

}  // namespace esc
