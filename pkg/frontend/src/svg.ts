/** Minimal deterministic SVG chart building: scales, axes, polylines. */

export interface Series {
    label: string
    x: number[]
    y: number[]
    color: string
    dash?: string
}

export interface PanelSpec {
    title: string
    xLabel: string
    yLabel: string
    series: Series[]
}

export interface Scale {
    (v: number): number
    domain: [number, number]
}

export function linearScale(domain: [number, number], range: [number, number]): Scale {
    let [d0, d1] = domain
    if (d0 === d1) {
        d0 -= 0.5
        d1 += 0.5
    }
    const k = (range[1] - range[0]) / (d1 - d0)
    const f = ((v: number) => range[0] + (v - d0) * k) as Scale
    f.domain = [d0, d1]
    return f
}

/** Round-valued tick positions covering [min, max], roughly n of them. */
export function ticks(min: number, max: number, n: number): number[] {
    if (min === max) return [min]
    const span = max - min
    const step0 = span / Math.max(1, n)
    const mag = Math.pow(10, Math.floor(Math.log10(step0)))
    let step = mag
    for (const m of [1, 2, 5, 10]) {
        if (m * mag >= step0) {
            step = m * mag
            break
        }
    }
    const out: number[] = []
    for (let v = Math.ceil(min / step) * step; v <= max + step * 1e-9; v += step) {
        out.push(Math.abs(v) < step * 1e-9 ? 0 : v)
    }
    return out
}

function fmt(v: number): string {
    if (v === 0) return "0"
    const a = Math.abs(v)
    if (a >= 1e4 || a < 1e-3) return v.toExponential(1)
    return String(parseFloat(v.toPrecision(6)))
}

function extent(arrays: number[][]): [number, number] {
    let lo = Infinity
    let hi = -Infinity
    for (const a of arrays) {
        for (const v of a) {
            if (v < lo) lo = v
            if (v > hi) hi = v
        }
    }
    if (!Number.isFinite(lo)) return [0, 1]
    return [lo, hi]
}

const W = 460
const H = 320
const MARGIN = { left: 64, right: 14, top: 28, bottom: 42 }

/** One panel as an SVG group; origin at (0,0), size W x H. */
export function renderPanel(spec: PanelSpec): string {
    const innerW = W - MARGIN.left - MARGIN.right
    const innerH = H - MARGIN.top - MARGIN.bottom
    const [x0, x1] = extent(spec.series.map(s => s.x))
    const [y0raw, y1raw] = extent(spec.series.map(s => s.y))
    const pad = (y1raw - y0raw || 1) * 0.06
    const sx = linearScale([x0, x1], [MARGIN.left, MARGIN.left + innerW])
    const sy = linearScale([y0raw - pad, y1raw + pad], [MARGIN.top + innerH, MARGIN.top])

    const parts: string[] = []
    parts.push(`<rect x="${MARGIN.left}" y="${MARGIN.top}" width="${innerW}" height="${innerH}" fill="none" stroke="#444" stroke-width="1"/>`)
    for (const t of ticks(sx.domain[0], sx.domain[1], 6)) {
        const px = sx(t).toFixed(2)
        parts.push(`<line x1="${px}" y1="${MARGIN.top + innerH}" x2="${px}" y2="${MARGIN.top + innerH + 5}" stroke="#444"/>`)
        parts.push(`<text x="${px}" y="${MARGIN.top + innerH + 18}" font-size="11" text-anchor="middle">${fmt(t)}</text>`)
    }
    for (const t of ticks(sy.domain[0], sy.domain[1], 5)) {
        const py = sy(t).toFixed(2)
        parts.push(`<line x1="${MARGIN.left - 5}" y1="${py}" x2="${MARGIN.left}" y2="${py}" stroke="#444"/>`)
        parts.push(`<text x="${MARGIN.left - 8}" y="${py}" font-size="11" text-anchor="end" dominant-baseline="middle">${fmt(t)}</text>`)
    }
    for (const s of spec.series) {
        const pts: string[] = []
        for (let i = 0; i < s.x.length; i++) {
            pts.push(`${sx(s.x[i]).toFixed(2)},${sy(s.y[i]).toFixed(2)}`)
        }
        const dash = s.dash ? ` stroke-dasharray="${s.dash}"` : ""
        parts.push(`<polyline points="${pts.join(" ")}" fill="none" stroke="${s.color}" stroke-width="1.4"${dash}/>`)
    }
    let lx = MARGIN.left + 8
    for (const s of spec.series) {
        const ly = MARGIN.top + 14 + 14 * spec.series.indexOf(s)
        const dash = s.dash ? ` stroke-dasharray="${s.dash}"` : ""
        parts.push(`<line x1="${lx}" y1="${ly - 4}" x2="${lx + 22}" y2="${ly - 4}" stroke="${s.color}" stroke-width="1.4"${dash}/>`)
        parts.push(`<text x="${lx + 27}" y="${ly}" font-size="11">${s.label}</text>`)
    }
    parts.push(`<text x="${W / 2}" y="16" font-size="13" text-anchor="middle" font-weight="bold">${spec.title}</text>`)
    parts.push(`<text x="${MARGIN.left + innerW / 2}" y="${H - 8}" font-size="12" text-anchor="middle">${spec.xLabel}</text>`)
    parts.push(`<text x="16" y="${MARGIN.top + innerH / 2}" font-size="12" text-anchor="middle" transform="rotate(-90 16 ${MARGIN.top + innerH / 2})">${spec.yLabel}</text>`)
    return parts.join("\n")
}

/** Assemble panels into a grid and wrap in a complete SVG document. */
export function renderFigure(panels: PanelSpec[], perRow = 2): string {
    const rows = Math.ceil(panels.length / perRow)
    const cols = Math.min(perRow, panels.length)
    const parts: string[] = [
        `<svg xmlns="http://www.w3.org/2000/svg" width="${cols * W}" height="${rows * H}" viewBox="0 0 ${cols * W} ${rows * H}">`,
        `<rect width="100%" height="100%" fill="white"/>`,
    ]
    panels.forEach((p, i) => {
        const tx = (i % perRow) * W
        const ty = Math.floor(i / perRow) * H
        parts.push(`<g transform="translate(${tx} ${ty})">`)
        parts.push(renderPanel(p))
        parts.push(`</g>`)
    })
    parts.push(`</svg>`)
    return parts.join("\n")
}

export const PANEL_SIZE = { width: W, height: H }
