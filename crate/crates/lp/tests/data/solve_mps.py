"""Solve a free-format MPS file with scipy HiGHS and print name=value lines."""
import sys, numpy as np
from scipy.optimize import linprog
from scipy.sparse import csr_matrix
sec=None; rows={}; rtype={}; cols={}; ent=[]; rhs={}; bnd={}; sense='MIN'; obj=None
for line in open(sys.argv[1]):
    if not line.strip(): continue
    if not line[0].isspace():
        sec=line.split()[0]; continue
    f=line.split()
    if sec=='OBJSENSE': sense=f[0]
    elif sec=='ROWS':
        if f[0]=='N': obj=f[1]
        else: rows[f[1]]=len(rows); rtype[f[1]]=f[0]
    elif sec=='COLUMNS':
        c=cols.setdefault(f[0],len(cols)); ent.append((f[1],c,float(f[2])))
    elif sec=='RHS': rhs[f[1]]=float(f[2])
    elif sec=='BOUNDS': bnd.setdefault(f[2],[]).append((f[0], float(f[3]) if len(f)>3 else None))
n=len(cols); c=np.zeros(n); I=[];J=[];V=[]
for r,j,v in ent:
    if r==obj: c[j]+=v
    else: I.append(rows[r]);J.append(j);V.append(v)
A=csr_matrix((V,(I,J)),shape=(len(rows),n))
b=np.array([rhs.get(r,0.0) for r in rows])
le=[i for r,i in rows.items() if rtype[r]=='L']; eq=[i for r,i in rows.items() if rtype[r]=='E']
bounds=[]
for name in cols:
    lo,hi=0.0,None
    for kind,v in bnd.get(name,[]):
        if kind=='UP': hi=v
        elif kind=='LO': lo=v
        elif kind=='FX': lo=hi=v
        elif kind=='FR': lo=hi=None
        elif kind=='MI': lo=None
    bounds.append((lo,hi))
if sense=='MAX': c=-c
res=linprog(c,A_ub=A[le],b_ub=b[le],A_eq=A[eq],b_eq=b[eq],bounds=bounds,method='highs',
            options={'primal_feasibility_tolerance':1e-10,'dual_feasibility_tolerance':1e-10})
print('# scipy', res.status, -res.fun if sense=='MAX' else res.fun, file=sys.stderr)
for name,j in cols.items(): print(f"{name}={float(res.x[j])!r}")
