import { readFileSync } from "node:fs";
import Papa from "papaparse";

export class CsvError extends Error {}

export interface CsvTable {
  columns: string[];
  rows: Record<string, string>[];
}

export function parseCsvFile(path: string): CsvTable {
  let text: string;
  try {
    text = readFileSync(path, "utf8");
  } catch (err) {
    throw new CsvError(`cannot read ${path}: ${(err as Error).message}`);
  }
  const parsed = Papa.parse<Record<string, string>>(text.trim(), {
    header: true,
    skipEmptyLines: true,
  });
  if (parsed.errors.length > 0) {
    const first = parsed.errors[0];
    throw new CsvError(`${path}: ${first.message} (row ${first.row})`);
  }
  const columns = parsed.meta.fields ?? [];
  if (columns.length === 0) {
    throw new CsvError(`${path}: no header row`);
  }
  if (parsed.data.length === 0) {
    throw new CsvError(`${path}: no data rows`);
  }
  return { columns, rows: parsed.data };
}

export function requireColumns(table: CsvTable, required: string[], path: string): void {
  for (const column of required) {
    if (!table.columns.includes(column)) {
      throw new CsvError(
        `missing required column "${column}" in ${path} (found: ${table.columns.join(", ")})`,
      );
    }
  }
}

export function numeric(row: Record<string, string>, column: string): number {
  const value = Number(row[column]);
  return value;
}
