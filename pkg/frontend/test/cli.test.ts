import { execFileSync } from "node:child_process";
import { existsSync, mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { beforeAll, describe, expect, it } from "vitest";

const ROOT = join(__dirname, "..");
const CLI = join(ROOT, "dist", "cli.js");
const FIXTURES = join(ROOT, "fixtures");

function run(args: string[]): { code: number; stderr: string } {
  try {
    execFileSync("node", [CLI, ...args], { stdio: ["ignore", "pipe", "pipe"] });
    return { code: 0, stderr: "" };
  } catch (err: any) {
    return { code: err.status ?? 1, stderr: String(err.stderr ?? "") };
  }
}

describe("plots CLI", () => {
  let outDir: string;
  beforeAll(() => {
    outDir = mkdtempSync(join(tmpdir(), "plots-cli-"));
    expect(existsSync(CLI), "run `npm run build` before the CLI tests").toBe(true);
  });

  it("renders every figure kind deterministically across invocations", () => {
    const jobs: Array<[string, string]> = [
      ["spectral-evolution", join(FIXTURES, "run_seed0.csv")],
      ["lyapunov-decay", join(FIXTURES, "run_seed0.csv")],
      ["generator-trend", join(FIXTURES, "generator_test.csv")],
      ["phase-transition", join(FIXTURES, "sweep.json")],
      ["ablation-bars", join(FIXTURES, "ablation.json")],
    ];
    for (const [kind, input] of jobs) {
      const out1 = join(outDir, `${kind}-1.svg`);
      const out2 = join(outDir, `${kind}-2.svg`);
      expect(run(["render", "--kind", kind, "--in", input, "--out", out1]).code).toBe(0);
      expect(run(["render", "--kind", kind, "--in", input, "--out", out2]).code).toBe(0);
      expect(readFileSync(out1, "utf8")).toBe(readFileSync(out2, "utf8"));
    }
  });

  it("fails with a named schema error on a missing column", () => {
    const bad = join(outDir, "bad.csv");
    writeFileSync(bad, "step,V\n0,1\n");
    const res = run(["render", "--kind", "lyapunov-decay", "--in", bad, "--out", join(outDir, "x.svg")]);
    expect(res.code).toBe(1);
    expect(res.stderr).toContain("SchemaError");
    expect(res.stderr).toContain("missing required column");
  });

  it("rejects non-svg output paths", () => {
    const res = run([
      "render",
      "--kind",
      "lyapunov-decay",
      "--in",
      join(FIXTURES, "run_seed0.csv"),
      "--out",
      join(outDir, "fig.png"),
    ]);
    expect(res.code).toBe(1);
    expect(res.stderr).toContain(".svg");
  });

  it("renders a manifest in batch mode", () => {
    const manifest = join(outDir, "manifest.json");
    const targets = [
      { kind: "lyapunov-decay", in: [join(FIXTURES, "run_seed0.csv")], out: join(outDir, "b1.svg") },
      { kind: "phase-transition", in: [join(FIXTURES, "sweep.json")], out: join(outDir, "b2.svg") },
    ];
    writeFileSync(manifest, JSON.stringify(targets));
    expect(run(["batch", "--manifest", manifest]).code).toBe(0);
    expect(existsSync(targets[0].out)).toBe(true);
    expect(existsSync(targets[1].out)).toBe(true);
  });

  it("returns an i/o error code for unwritable outputs", () => {
    const res = run([
      "render",
      "--kind",
      "lyapunov-decay",
      "--in",
      join(FIXTURES, "run_seed0.csv"),
      "--out",
      "/proc/no_such_dir/fig.svg",
    ]);
    expect(res.code).toBe(2);
  });
});
