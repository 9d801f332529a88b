#!/usr/bin/env node
import yargs from "yargs";
import { hideBin } from "yargs/helpers";
import { CsvError, render } from "./index.js";
import type { FigureKind } from "./figures.js";

const argv = yargs(hideBin(process.argv))
  .usage("relgrad-plots --csv <file> --kind <figure> --out <file.svg>")
  .option("csv", { type: "string", demandOption: true, describe: "input CSV path" })
  .option("kind", {
    choices: ["rate_curve", "bits_curve", "metric_bars"] as const,
    demandOption: true,
    describe: "figure kind",
  })
  .option("out", { type: "string", demandOption: true, describe: "output SVG path" })
  .option("metric", {
    type: "string",
    describe: "report column for metric_bars (default mean_best_grad_norm_sq)",
  })
  .strict()
  .parseSync();

try {
  render({
    csvPath: argv.csv,
    kind: argv.kind as FigureKind,
    outPath: argv.out,
    metric: argv.metric,
  });
  console.log(`wrote ${argv.out}`);
} catch (err) {
  if (err instanceof CsvError) {
    console.error(`error: ${err.message}`);
    process.exit(1);
  }
  throw err;
}
