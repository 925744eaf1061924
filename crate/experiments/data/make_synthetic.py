"""Writes synthetic daily price files in the column layout of the public
cryptocurrency price history dataset. Replace them with the real files to run
the pipeline on market data."""
import csv
import datetime
import random

COINS = {
    # name: list of (days, level)
    "Alpha": [(300, 120.0), (250, 340.0), (250, 210.0), (200, 520.0)],
    "Beta": [(450, 8.0), (300, 15.0), (250, 11.0)],
    "Gamma": [(200, 0.9), (400, 1.6), (400, 1.2)],
    "Delta": [(350, 40.0), (350, 95.0), (300, 70.0)],
}

rng = random.Random(7)
start = datetime.date(2018, 1, 1)
for name, pieces in COINS.items():
    with open(f"coin_{name}.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["SNo", "Name", "Symbol", "Date", "High", "Low", "Open", "Close", "Volume", "Marketcap"])
        day = 0
        price = pieces[0][1]
        for days, level in pieces:
            for _ in range(days):
                # mean-reverting walk around the segment level with Pareto shocks
                shock = (rng.paretovariate(2.5) - 1.0) * rng.choice([-1, 1]) * 0.03 * level
                price = max(0.01 * level, price + 0.2 * (level - price) + shock)
                hi = price * (1 + abs(rng.gauss(0, 0.02)))
                lo = price * (1 - abs(rng.gauss(0, 0.02)))
                date = start + datetime.timedelta(days=day)
                w.writerow([day + 1, name, name[:3].upper(), f"{date} 23:59:59",
                            f"{hi:.6f}", f"{lo:.6f}", f"{price:.6f}", f"{price:.6f}",
                            f"{rng.uniform(1e6, 1e8):.2f}", f"{price * 1e7:.2f}"])
                day += 1
