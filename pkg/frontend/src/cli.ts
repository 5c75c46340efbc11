#!/usr/bin/env node
/**
 * Figure generation from simulator outputs.
 *
 *   plots render --kind spectral-evolution --in run_seed0.csv --out fig.svg
 *   plots batch --manifest figures.json
 *
 * The manifest is a JSON array of { kind, in: [paths], out } entries.
 * Exit codes: 0 rendered, 1 schema/usage error, 2 i/o error.
 */
import { readFileSync, writeFileSync } from "node:fs";
import yargs from "yargs";
import { hideBin } from "yargs/helpers";
import { z } from "zod";
import { buildFigure } from "./figures.js";
import { renderSvg } from "./render.js";
import { FIGURE_KINDS, FigureKind, SchemaError } from "./schema.js";

const manifestSchema = z.array(
  z.object({
    kind: z.enum(FIGURE_KINDS),
    in: z.array(z.string()).min(1),
    out: z.string(),
  })
);

function renderOne(kind: FigureKind, inputs: string[], out: string): void {
  if (!out.endsWith(".svg")) {
    throw new SchemaError(`output must be an .svg path, got "${out}" (vector output only)`);
  }
  const svg = renderSvg(buildFigure(kind, inputs));
  writeFileSync(out, svg);
  console.log(`wrote ${out}`);
}

export function main(argv: string[]): number {
  try {
    const parser = yargs(argv)
      .scriptName("plots")
      .command(
        "render",
        "render one figure from CSV/JSON inputs",
        (y) =>
          y
            .option("kind", { choices: FIGURE_KINDS, demandOption: true })
            .option("in", { type: "string", array: true, demandOption: true })
            .option("out", { type: "string", demandOption: true }),
        (args) => {
          renderOne(args.kind as FigureKind, args.in as string[], args.out as string);
        }
      )
      .command(
        "batch",
        "render every figure listed in a manifest",
        (y) => y.option("manifest", { type: "string", demandOption: true }),
        (args) => {
          const parsed = manifestSchema.safeParse(
            JSON.parse(readFileSync(args.manifest as string, "utf8"))
          );
          if (!parsed.success) {
            throw new SchemaError(`manifest: ${parsed.error.issues[0].message}`);
          }
          for (const entry of parsed.data) {
            renderOne(entry.kind, entry.in, entry.out);
          }
        }
      )
      .demandCommand(1)
      .strict()
      .fail((msg, err) => {
        throw err ?? new SchemaError(msg ?? "bad usage");
      })
      .exitProcess(false);
    parser.parseSync();
    return 0;
  } catch (err) {
    if (err instanceof SchemaError) {
      console.error(`${err.name}: ${err.message}`);
      return 1;
    }
    if (err instanceof Error && "code" in err) {
      console.error(`i/o error: ${err.message}`);
      return 2;
    }
    console.error(String(err));
    return 1;
  }
}

process.exitCode = main(hideBin(process.argv));
