/** Readers for hhsim run outputs: the record CSV and density snapshots. */

export interface DataTable {
    columns: string[]
    data: Map<string, number[]>
    rows: number
}

/** Columns the simulator writes, in order. */
export const RECORD_COLUMNS = [
    "t_au", "norm", "E_total", "E_A", "E_B",
    "R_mean", "z1_mean", "z2_mean", "dz1", "dz2",
    "I_A_e1", "I_A_e2", "I_B_e1", "I_B_e2",
    "field_A", "field_B",
] as const

export function parseCsv(text: string, file: string): DataTable {
    const lines = text.split(/\r?\n/).filter(l => l.trim().length > 0)
    if (lines.length === 0) {
        throw new Error(`${file}: empty CSV`)
    }
    const columns = lines[0].split(",").map(s => s.trim())
    if (lines.length < 2) {
        throw new Error(`${file}: no data rows`)
    }
    const data = new Map<string, number[]>(columns.map(c => [c, []]))
    for (let i = 1; i < lines.length; i++) {
        const cells = lines[i].split(",")
        if (cells.length !== columns.length) {
            throw new Error(`${file}: row ${i} has ${cells.length} cells, expected ${columns.length}`)
        }
        for (let j = 0; j < columns.length; j++) {
            const v = Number(cells[j])
            if (!Number.isFinite(v)) {
                throw new Error(`${file}: row ${i} column '${columns[j]}' is not a number: '${cells[j]}'`)
            }
            data.get(columns[j])!.push(v)
        }
    }
    return { columns, data, rows: lines.length - 1 }
}

/** Fetch a column, failing loudly with the column and file named. */
export function column(table: DataTable, name: string, file: string): number[] {
    const col = table.data.get(name)
    if (col === undefined) {
        throw new Error(`${file}: missing column '${name}' (have: ${table.columns.join(", ")})`)
    }
    return col
}

export interface Density {
    z: number[]
    p: number[]
}

export function parseDensity(text: string, file: string): Density {
    const table = parseCsv(text, file)
    return { z: column(table, "z", file), p: column(table, "P", file) }
}
