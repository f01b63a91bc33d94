/** Figure assembly from a run output directory.
 *
 * These renderers only read simulator outputs and draw them; the single
 * derived quantity is the a.u.-to-fs time conversion on the x axes and the
 * pointwise difference of two stored density snapshots for the
 * change-in-density overlay.
 */

import { readFileSync, readdirSync, existsSync } from "fs"
import { join } from "path"
import { column, parseCsv, parseDensity, type DataTable, type Density } from "./csv.js"
import { renderFigure, type PanelSpec } from "./svg.js"

const FS_TO_AU = 41.341373336

export function loadRecord(runDir: string): { table: DataTable, file: string } {
    const file = join(runDir, "record.csv")
    return { table: parseCsv(readFileSync(file, "utf8"), file), file }
}

export function densityFile(runDir: string, electron: "e1" | "e2", timeFs: number): string {
    return join(runDir, `density_${electron}_t${timeFs.toFixed(2)}fs.csv`)
}

export function loadDensity(runDir: string, electron: "e1" | "e2", timeFs: number): Density {
    const file = densityFile(runDir, electron, timeFs)
    return parseDensity(readFileSync(file, "utf8"), file)
}

/** Density snapshot times available in a run directory, in fs. */
export function availableSnapshotTimes(runDir: string, electron: "e1" | "e2" = "e1"): number[] {
    const re = new RegExp(`^density_${electron}_t([0-9.]+)fs\\.csv$`)
    const out: number[] = []
    for (const name of readdirSync(runDir)) {
        const m = re.exec(name)
        if (m) out.push(Number(m[1]))
    }
    return out.sort((a, b) => a - b)
}

/** Four-panel overview: energies, ionization, expectations, driving field. */
export function renderOverviewFigure(runDir: string): string {
    const { table, file } = loadRecord(runDir)
    const tFs = column(table, "t_au", file).map(t => t / FS_TO_AU)
    const panels: PanelSpec[] = [
        {
            title: "Atomic energies",
            xLabel: "t (fs)",
            yLabel: "E (a.u.)",
            series: [
                { label: "E_A", x: tFs, y: column(table, "E_A", file), color: "#c0392b" },
                { label: "E_B", x: tFs, y: column(table, "E_B", file), color: "#2471a3", dash: "6 3" },
            ],
        },
        {
            title: "Ionization",
            xLabel: "t (fs)",
            yLabel: "probability",
            series: [
                { label: "I_A (e1, -z_d)", x: tFs, y: column(table, "I_A_e1", file), color: "#c0392b" },
                { label: "I_B (e2, +z_d)", x: tFs, y: column(table, "I_B_e2", file), color: "#2471a3", dash: "6 3" },
                { label: "I_A (e2, -z_d)", x: tFs, y: column(table, "I_A_e2", file), color: "#b07820", dash: "2 3" },
                { label: "I_B (e1, +z_d)", x: tFs, y: column(table, "I_B_e1", file), color: "#1e8449", dash: "2 3" },
            ],
        },
        {
            title: "Expectation values",
            xLabel: "t (fs)",
            yLabel: "position (a.u.)",
            series: [
                { label: "<z1>", x: tFs, y: column(table, "z1_mean", file), color: "#c0392b" },
                { label: "<z2>", x: tFs, y: column(table, "z2_mean", file), color: "#2471a3", dash: "6 3" },
                { label: "<R>", x: tFs, y: column(table, "R_mean", file), color: "#566573", dash: "1 3" },
            ],
        },
        {
            title: "Local field at atom A",
            xLabel: "t (fs)",
            yLabel: "E^A(t) (a.u.)",
            series: [
                { label: "field_A", x: tFs, y: column(table, "field_A", file), color: "#1e8449" },
            ],
        },
    ]
    return renderFigure(panels, 2)
}

/** Two-curve P(z1), P(z2) overlay at one snapshot time. */
export function renderDensityFigure(runDir: string, timeFs: number): string {
    const p1 = loadDensity(runDir, "e1", timeFs)
    const p2 = loadDensity(runDir, "e2", timeFs)
    const panel: PanelSpec = {
        title: `Electron probabilities at t = ${timeFs.toFixed(2)} fs`,
        xLabel: "z (a.u.)",
        yLabel: "P(z)",
        series: [
            { label: "P(z1)", x: p1.z, y: p1.p, color: "#c0392b" },
            { label: "P(z2)", x: p2.z, y: p2.p, color: "#2471a3", dash: "6 3" },
        ],
    }
    return renderFigure([panel], 1)
}

/** Density change relative to t=0 for both electrons at one snapshot time. */
export function renderDensityChangeFigure(runDir: string, timeFs: number): string {
    const panels: PanelSpec[] = []
    for (const e of ["e1", "e2"] as const) {
        const now = loadDensity(runDir, e, timeFs)
        const ref = loadDensity(runDir, e, 0.0)
        if (now.z.length !== ref.z.length) {
            throw new Error(`density grids differ between t=0 and t=${timeFs.toFixed(2)} fs for ${e}`)
        }
        const dp = now.p.map((v, i) => v - ref.p[i])
        panels.push({
            title: `Change in P(z${e === "e1" ? "1" : "2"}) at t = ${timeFs.toFixed(2)} fs`,
            xLabel: "z (a.u.)",
            yLabel: "dP(z)",
            series: [
                { label: e === "e1" ? "dP(z1)" : "dP(z2)", x: now.z, y: dp, color: e === "e1" ? "#c0392b" : "#2471a3" },
            ],
        })
    }
    return renderFigure(panels, 2)
}

export function figureKinds(): string[] {
    return ["overview", "density", "density-change"]
}

export function renderByKind(kind: string, runDir: string, timeFs?: number): string {
    if (!existsSync(runDir)) {
        throw new Error(`run directory not found: ${runDir}`)
    }
    switch (kind) {
        case "overview":
            return renderOverviewFigure(runDir)
        case "density": {
            const t = timeFs ?? lastSnapshotTime(runDir)
            return renderDensityFigure(runDir, t)
        }
        case "density-change": {
            const t = timeFs ?? lastSnapshotTime(runDir)
            return renderDensityChangeFigure(runDir, t)
        }
        default:
            throw new Error(`unknown figure kind '${kind}' (expected ${figureKinds().join(", ")})`)
    }
}

function lastSnapshotTime(runDir: string): number {
    const times = availableSnapshotTimes(runDir)
    if (times.length === 0) {
        throw new Error(`${runDir}: no density snapshots found`)
    }
    return times[times.length - 1]
}
