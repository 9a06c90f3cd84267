#!/usr/bin/env node
/**
 * Runner entry point: `node dist/main.js <job.json>`.
 *
 * Emits one record per case on stdout. Exit 0 means the protocol was
 * honored even when the candidate itself failed; any nonzero exit tells
 * the harness the run is unusable.
 */
import { readFileSync } from "node:fs";
import { executeJob } from "./execute";
import { parseJob, serializeRecord } from "./protocol";

function main(argv: string[]): number {
  const jobPath = argv[2];
  if (!jobPath) {
    process.stderr.write("usage: main.js <job.json>\n");
    return 2;
  }
  const job = parseJob(readFileSync(jobPath, "utf8"));
  executeJob(job, (record) => {
    process.stdout.write(serializeRecord(record) + "\n");
  });
  return 0;
}

try {
  process.exitCode = main(process.argv);
} catch (err) {
  process.stderr.write(`runner protocol failure: ${err}\n`);
  process.exitCode = 1;
}
