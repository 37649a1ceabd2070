// cli.ts
//
// report --in <dirs...> --out report.html

import { writeFileSync } from "node:fs";
import { pathToFileURL } from "node:url";

import { discoverInputs, renderReport } from "./report.js";

export function runCli(argv: string[]): number {
  try {
    if (argv[0] !== "report") {
      throw new Error("usage: report --in <dirs...> --out <report.html>");
    }
    const dirs: string[] = [];
    let out = "";
    let i = 1;
    while (i < argv.length) {
      if (argv[i] === "--in") {
        i += 1;
        while (i < argv.length && !argv[i].startsWith("--")) {
          dirs.push(argv[i]);
          i += 1;
        }
      } else if (argv[i] === "--out") {
        out = argv[i + 1] ?? "";
        i += 2;
      } else {
        throw new Error(`unknown argument '${argv[i]}'`);
      }
    }
    if (out === "") {
      throw new Error("missing --out <report.html>");
    }
    const inputs = discoverInputs(dirs);
    writeFileSync(out, renderReport(inputs));
    console.log(
      `wrote ${out}: ${inputs.bundles.length} bundles, ${inputs.checks.length} check reports`,
    );
    return 0;
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    return 1;
  }
}

if (
  process.argv[1] &&
  import.meta.url === pathToFileURL(process.argv[1]).href
) {
  process.exit(runCli(process.argv.slice(2)));
}
