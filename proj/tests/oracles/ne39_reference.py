"""Independent numpy reference for the NE39 case: power flow, Kron reduction,
classical-model swing simulation. Used to freeze expected values in the C++
tests; not part of the build."""
import sys
import numpy as np


def load(path):
    sec = None
    buses, branches, gens = [], [], []
    for line in open(path):
        line = line.split('#')[0].strip()
        if not line:
            continue
        if line in ('BUS', 'BRANCH', 'GENERATOR'):
            sec = line
            continue
        v = [float(x) for x in line.split()]
        {'BUS': buses, 'BRANCH': branches, 'GENERATOR': gens}[sec].append(v)
    return np.array(buses), np.array(branches), np.array(gens)


def ybus(n, branches):
    Y = np.zeros((n, n), complex)
    for f, t, r, x, b in branches:
        f, t = int(f) - 1, int(t) - 1
        y = 1 / complex(r, x)
        Y[f, f] += y + 1j * b / 2
        Y[t, t] += y + 1j * b / 2
        Y[f, t] -= y
        Y[t, f] -= y
    return Y


def power_flow(buses, branches, gens):
    n = len(buses)
    Y = ybus(n, branches)
    typ = buses[:, 1].astype(int)
    V = np.ones(n)
    th = np.zeros(n)
    Psch = -buses[:, 2].copy()
    Qsch = -buses[:, 3].copy()
    for g in gens:
        b = int(g[0]) - 1
        V[b] = g[2]
        if typ[b] != 3:
            Psch[b] += g[1]
    pv = [i for i in range(n) if typ[i] == 2]
    pq = [i for i in range(n) if typ[i] == 1]
    ns = pv + pq
    for it in range(50):
        Vc = V * np.exp(1j * th)
        S = Vc * np.conj(Y @ Vc)
        mis = np.concatenate([Psch[ns] - S.real[ns], Qsch[pq] - S.imag[pq]])
        if np.max(np.abs(mis)) < 1e-10:
            break
        # numerical Jacobian is fine for a reference
        x0 = np.concatenate([th[ns], V[pq]])
        J = np.zeros((len(mis), len(x0)))
        def f(x):
            t2, v2 = th.copy(), V.copy()
            t2[ns] = x[:len(ns)]
            v2[pq] = x[len(ns):]
            Vc = v2 * np.exp(1j * t2)
            S = Vc * np.conj(Y @ Vc)
            return np.concatenate([S.real[ns], S.imag[pq]])
        f0 = f(x0)
        for k in range(len(x0)):
            e = np.zeros(len(x0)); e[k] = 1e-7
            J[:, k] = (f(x0 + e) - f(x0 - e)) / 2e-7
        dx = np.linalg.solve(J, mis)
        x0 = x0 + dx
        th[ns] = x0[:len(ns)]
        V[pq] = x0[len(ns):]
    Vc = V * np.exp(1j * th)
    S = Vc * np.conj(Y @ Vc)
    return Y, Vc, S, it


def reduced(Y, Vc, S, buses, gens, fault_bus=None):
    n = len(buses)
    Yl = Y.copy()
    # constant-impedance loads from scheduled load at solved voltage
    for i in range(n):
        sl = complex(buses[i, 2], buses[i, 3])
        Yl[i, i] += np.conj(sl) / abs(Vc[i]) ** 2
    ng = len(gens)
    gb = [int(g[0]) - 1 for g in gens]
    yg = np.array([1 / complex(0, g[5]) for g in gens])
    big = np.zeros((ng + n, ng + n), complex)
    big[ng:, ng:] = Yl
    for k in range(ng):
        big[k, k] += yg[k]
        big[ng + gb[k], ng + gb[k]] += yg[k]
        big[k, ng + gb[k]] -= yg[k]
        big[ng + gb[k], k] -= yg[k]
    keep = list(range(ng))
    elim = list(range(ng, ng + n))
    if fault_bus is not None:
        elim.remove(ng + fault_bus - 1)  # grounded: drop row/col entirely
    A = big[np.ix_(keep, keep)]
    B = big[np.ix_(keep, elim)]
    C = big[np.ix_(elim, elim)]
    return A - B @ np.linalg.solve(C, B.T), big


def simulate(case, t_clear, t_fault=0.1, horizon=10.0, h=0.01, D=2.0, fault_bus=15):
    buses, branches, gens = case
    Y, Vc, S, _ = power_flow(buses, branches, gens)
    gb = [int(g[0]) - 1 for g in gens]
    # generator terminal injection = bus injection + local load
    Sg = np.array([S[b] + complex(buses[b, 2], buses[b, 3]) for b in gb])
    Ig = np.conj(Sg / Vc[gb])
    E = Vc[gb] + 1j * gens[:, 5] * Ig
    Emag = np.abs(E)
    d0 = np.angle(E)
    Pm = (E * np.conj(Ig)).real
    H = gens[:, 9]
    ws = 2 * np.pi * 60
    Ypre, _ = reduced(Y, Vc, S, buses, gens)
    Yf, _ = reduced(Y, Vc, S, buses, gens, fault_bus)

    def rhs(x, Yr):
        d, w = x[:10], x[10:]
        Ev = Emag * np.exp(1j * d)
        Pe = (Ev * np.conj(Yr @ Ev)).real
        return np.concatenate([ws * w, (Pm - Pe - D * w) / (2 * H)])

    x = np.concatenate([d0, np.zeros(10)])
    steps = int(round(horizon / h))
    out = [x.copy()]
    for k in range(steps):
        t = k * h
        Yr = Yf if (t_fault - 1e-9 <= t < t_clear - 1e-9) else Ypre
        k1 = rhs(x, Yr); k2 = rhs(x + h / 2 * k1, Yr)
        k3 = rhs(x + h / 2 * k2, Yr); k4 = rhs(x + h * k3, Yr)
        x = x + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        out.append(x.copy())
    return np.array(out), d0, Pm, Emag


def hops(branches, source, n=39):
    import collections
    adj = collections.defaultdict(set)
    for f, t, *_ in branches:
        adj[int(f)].add(int(t)); adj[int(t)].add(int(f))
    dist = {source: 0}
    q = collections.deque([source])
    while q:
        u = q.popleft()
        for v in sorted(adj[u]):
            if v not in dist:
                dist[v] = dist[u] + 1
                q.append(v)
    return [dist.get(i, -1) for i in range(1, n + 1)]


if __name__ == '__main__':
    case = load(sys.argv[1])
    buses, branches, gens = case
    Y, Vc, S, it = power_flow(*case)
    np.set_printoptions(precision=12, linewidth=160)
    print('iterations', it)
    print('|V|', repr(np.abs(Vc)))
    print('angle', repr(np.angle(Vc)))
    print('slack P', S[30].real + buses[30, 2], 'Q', S[30].imag + buses[30, 3])
    Ypre, _ = reduced(Y, Vc, S, buses, gens)
    Yf, _ = reduced(Y, Vc, S, buses, gens, 15)
    print('Ypre[0,0]', Ypre[0, 0], 'Ypre[0,9]', Ypre[0, 9], 'Yf[0,0]', Yf[0, 0], 'Yf[3,4]', Yf[3, 4])
    tr, d0, Pm, Em = simulate(case, 0.74, D=300.0)
    print('d0', repr(d0))
    print('Pm', repr(Pm))
    print('Emag', repr(Em))
    for t in (50, 74, 100, 300, 1000):
        print('t', t / 100, 'delta', repr(tr[t, :10]))
    print('hops from 15', hops(branches, 15))
