#include <CLI11.hpp>

#include <iostream>

#include "conecalc/io.hpp"

int main(int argc, char** argv)
{
    CLI::App app{"conecalc - Mellin calculus on the model cone"};
    app.require_subcommand(1);

    std::string spec_path;
    std::string csv_dir;
    std::string out_path;
    std::vector<double> strip;
    int depth = -1;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--spec", spec_path, "problem specification file (JSON or key=value)")
            ->required();
        cmd->add_option("--csv", csv_dir, "directory for CSV tables");
        cmd->add_option("--out", out_path, "write the JSON report here instead of stdout");
        cmd->add_option("--strip", strip, "override the Re z search strip (two values)")
            ->expected(2);
        cmd->add_option("--depth", depth, "override the Taylor/weight-interval depth");
        return cmd;
    };

    std::vector<std::string> commands{"roots", "asymptotics", "solve", "norms", "check-symbol"};
    for (const auto& c : commands) add_common(app.add_subcommand(c));

    CLI11_PARSE(app, argc, argv);

    const std::string command = app.get_subcommands().front()->get_name();
    try {
        conecalc::ProblemSpec spec = conecalc::parse_spec_file(spec_path);
        if (strip.size() == 2) spec.doc["strip"] = {strip[0], strip[1]};
        if (depth >= 0) spec.doc["depth"] = depth;

        const conecalc::Report rep = conecalc::run(command, spec);
        if (!csv_dir.empty()) conecalc::write_csv_tables(rep, csv_dir);
        if (!out_path.empty()) {
            std::ofstream out(out_path);
            out << rep.to_json_string() << "\n";
        } else {
            std::cout << rep.to_json_string() << "\n";
        }
        return 0;
    } catch (const conecalc::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
